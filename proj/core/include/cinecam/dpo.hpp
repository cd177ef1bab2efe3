#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "cinecam/model.hpp"
#include "cinecam/scoring.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

struct PreferencePair {
    PartialShotTags prompt_tags;
    std::vector<int> winner;
    std::vector<int> loser;
    double winner_score = 0.0;
    double loser_score = 0.0;
    Strategy strategy = Strategy::cyclic;
};

/// Gap threshold below which a ranked pair carries no usable signal.
double default_score_gap(Strategy strategy);

/// Extreme pairing: sort candidates by score (descending, stable), pair rank
/// k with rank N-1-k. Pairs with gap < min_gap or identical token sequences
/// are dropped. Throws NoPairs when nothing survives.
std::vector<PreferencePair> build_preference_pairs(
    const std::vector<TokenizedTrajectory>& candidates,
    const std::vector<ScoreRecord>& scores, double min_gap);

/// -log sigmoid(beta * [(lp(w) - lr(w)) - (lp(l) - lr(l))]) with l* the
/// masked sequence logprobs of policy and frozen reference.
template <typename S>
double dpo_loss(const Policy<S>& policy, const Policy<S>& reference,
                const PreferencePair& pair, double beta);

/// Same value; also adds d(loss)/d(policy params) into grad.
template <typename S>
double dpo_loss_grad(const Policy<S>& policy, const Policy<S>& reference,
                     const PreferencePair& pair, double beta, std::vector<S>& grad);

extern template double dpo_loss<float>(const Policy<float>&, const Policy<float>&,
                                       const PreferencePair&, double);
extern template double dpo_loss<double>(const Policy<double>&, const Policy<double>&,
                                        const PreferencePair&, double);
extern template double dpo_loss_grad<float>(const Policy<float>&, const Policy<float>&,
                                            const PreferencePair&, double,
                                            std::vector<float>&);
extern template double dpo_loss_grad<double>(const Policy<double>&, const Policy<double>&,
                                             const PreferencePair&, double,
                                             std::vector<double>&);

struct DpoConfig {
    double beta = 0.1;
    int candidates = 8;
    double min_score_gap = -1.0;  // negative: use default_score_gap(strategy)
    double temperature = 1.0;
    int top_k = 50;
    double lr = 3e-4;
    int passes = 4;
    int frames = 30;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct DpoLogs {
    std::vector<double> pass_mean_loss;
    std::vector<double> pass_mean_winner_score;
    std::vector<double> pass_mean_loser_score;
    std::vector<double> pass_probe;  // one entry per pass when a probe is given
    std::vector<PreferencePair> pairs;  // every pair trained on, in visit order
    std::int64_t usable_pairs = 0;
    std::int64_t skipped_visits = 0;
};

/// On-policy preference training. Per prompt visit: sample `candidates`
/// sequences, decode, score under the strategy, build pairs, take one Adam
/// step on the mean pair loss. Candidates are resampled every visit, so
/// later passes see the improving policy. The reference stays frozen.
/// `probe` (optional) is evaluated after each pass, e.g. held-out MisR.
/// Throws DataTooSmall when fewer than 16 pairs were usable overall.
DpoLogs dpo_train(Policy<float>& policy, const Policy<float>& reference,
                  const std::vector<Prompt>& prompts, Strategy strategy,
                  const ScoreContext& ctx, const TokenSpec& spec, const DpoConfig& config,
                  std::uint64_t seed, int threads = 0,
                  const std::function<double(const Policy<float>&)>& probe = {});

void save_pairs(const std::filesystem::path& path, const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path);

}  // namespace cinecam

#include "cinecam/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <numeric>
#include <string>
#include <utility>

#include "cinecam/caption.hpp"
#include "cinecam/error.hpp"
#include "cinecam/io.hpp"
#include "cinecam/parallel.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

namespace {

using nlohmann::json;

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

template <typename S>
double masked_logprob(const Policy<S>& model, const std::vector<int>& tokens) {
    const std::size_t L = tokens.size();
    return model.sequence_logprob(tokens, trajectory_roles(L), trajectory_predicted(L),
                                  trajectory_role_layout());
}

json partial_tags_json(const PartialShotTags& t) {
    auto field = [](const auto& opt) {
        return opt ? json(std::string(to_string(*opt))) : json();
    };
    return {{"motion", field(t.motion)},   {"scale", field(t.scale)},
            {"direction", field(t.direction)}, {"angle", field(t.angle)},
            {"screen", field(t.screen)}};
}

PartialShotTags partial_tags_of_json(const json& j) {
    PartialShotTags t;
    if (!j.at("motion").is_null()) t.motion = motion_from_string(j["motion"].get<std::string>());
    if (!j.at("scale").is_null()) t.scale = scale_from_string(j["scale"].get<std::string>());
    if (!j.at("direction").is_null())
        t.direction = direction_from_string(j["direction"].get<std::string>());
    if (!j.at("angle").is_null()) t.angle = angle_from_string(j["angle"].get<std::string>());
    if (!j.at("screen").is_null()) t.screen = screen_from_string(j["screen"].get<std::string>());
    return t;
}

PartialShotTags prompt_partial_tags(const Prompt& prompt) {
    if (prompt.tags) return PartialShotTags::from(*prompt.tags);
    return parse_tags_from_prompt(prompt.text);
}

}  // namespace

double default_score_gap(Strategy strategy) {
    switch (strategy) {
        case Strategy::tag:
            return 1.0;
        case Strategy::regression:
            return 0.5;
        case Strategy::cyclic:
        case Strategy::remote:
            return 0.05;
    }
    throw Unreachable("default_score_gap");
}

std::vector<PreferencePair> build_preference_pairs(
    const std::vector<TokenizedTrajectory>& candidates,
    const std::vector<ScoreRecord>& scores, double min_gap) {
    if (candidates.size() != scores.size())
        throw LengthMismatch("build_preference_pairs: candidates vs scores");
    if (candidates.size() < 2) throw DomainError("build_preference_pairs: need >= 2 candidates");
    if (min_gap < 0.0) throw DomainError("build_preference_pairs: negative gap threshold");

    const std::size_t n = candidates.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // token-sequence tiebreak keeps the pairing invariant under candidate
    // permutation even when scores collide
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a].value != scores[b].value) return scores[a].value > scores[b].value;
        return candidates[a].tokens < candidates[b].tokens;
    });

    std::vector<PreferencePair> pairs;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const std::size_t wi = order[k], li = order[n - 1 - k];
        const double gap = scores[wi].value - scores[li].value;
        if (gap <= 0.0 || gap < min_gap) continue;
        if (candidates[wi].tokens == candidates[li].tokens) continue;
        PreferencePair p;
        p.winner = candidates[wi].tokens;
        p.loser = candidates[li].tokens;
        p.winner_score = scores[wi].value;
        p.loser_score = scores[li].value;
        p.strategy = scores[wi].strategy;
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw NoPairs("no candidate pair clears the score gap");
    return pairs;
}

template <typename S>
double dpo_loss(const Policy<S>& policy, const Policy<S>& reference,
                const PreferencePair& pair, double beta) {
    if (!(beta > 0.0)) throw DomainError("dpo_loss: beta must be > 0");
    const double margin =
        (masked_logprob(policy, pair.winner) - masked_logprob(reference, pair.winner)) -
        (masked_logprob(policy, pair.loser) - masked_logprob(reference, pair.loser));
    return softplus(-beta * margin);
}

template <typename S>
double dpo_loss_grad(const Policy<S>& policy, const Policy<S>& reference,
                     const PreferencePair& pair, double beta, std::vector<S>& grad) {
    if (!(beta > 0.0)) throw DomainError("dpo_loss: beta must be > 0");
    if (grad.size() != policy.params().size())
        throw LengthError("dpo_loss_grad: gradient buffer has wrong size");

    const RoleLayout& layout = trajectory_role_layout();
    const std::size_t lw = pair.winner.size(), ll = pair.loser.size();

    std::vector<S> gw(grad.size(), S(0)), gl(grad.size(), S(0));
    const double pw = policy.logprob_grad(pair.winner, trajectory_roles(lw),
                                          trajectory_predicted(lw), layout, 1.0, gw);
    const double pl = policy.logprob_grad(pair.loser, trajectory_roles(ll),
                                          trajectory_predicted(ll), layout, 1.0, gl);
    const double rw = masked_logprob(reference, pair.winner);
    const double rl = masked_logprob(reference, pair.loser);

    const double margin = (pw - rw) - (pl - rl);
    const double coef = beta * sigmoid(-beta * margin);
    for (std::size_t j = 0; j < grad.size(); ++j)
        grad[j] += static_cast<S>(coef) * (gl[j] - gw[j]);
    return softplus(-beta * margin);
}

template double dpo_loss<float>(const Policy<float>&, const Policy<float>&,
                                const PreferencePair&, double);
template double dpo_loss<double>(const Policy<double>&, const Policy<double>&,
                                 const PreferencePair&, double);
template double dpo_loss_grad<float>(const Policy<float>&, const Policy<float>&,
                                     const PreferencePair&, double, std::vector<float>&);
template double dpo_loss_grad<double>(const Policy<double>&, const Policy<double>&,
                                      const PreferencePair&, double, std::vector<double>&);

DpoLogs dpo_train(Policy<float>& policy, const Policy<float>& reference,
                  const std::vector<Prompt>& prompts, Strategy strategy,
                  const ScoreContext& ctx, const TokenSpec& spec, const DpoConfig& config,
                  std::uint64_t seed, int threads,
                  const std::function<double(const Policy<float>&)>& probe) {
    if (config.candidates < 2 || config.passes < 1 || config.frames < 2 ||
        !(config.beta > 0.0) || !(config.lr > 0.0) || !(config.temperature > 0.0) ||
        config.top_k < 1)
        throw DomainError("dpo_train: bad config");
    if (prompts.empty()) throw DataTooSmall("dpo_train: no prompts");
    spec.validate();

    const double min_gap =
        config.min_score_gap < 0.0 ? default_score_gap(strategy) : config.min_score_gap;
    const auto n_cand = static_cast<std::size_t>(config.candidates);

    DpoLogs logs;
    Adam<float> adam;
    const std::size_t np = policy.params().size();
    std::vector<float> grad(np), pair_grad(np);

    std::vector<std::size_t> order(prompts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::uint64_t visit = 0;
    for (int pass = 0; pass < config.passes; ++pass) {
        Rng shuffle_rng(seed, 0xd1ce + static_cast<std::uint64_t>(pass));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss_sum = 0.0, winner_sum = 0.0, loser_sum = 0.0;
        std::int64_t pass_pairs = 0;
        for (const std::size_t idx : order) {
            const Prompt& prompt = prompts[idx];
            const PartialShotTags cond = prompt_partial_tags(prompt);
            const std::uint64_t visit_seed = mix_seed(seed, 0xd15c0 + visit);
            ++visit;

            std::vector<TokenizedTrajectory> cands(n_cand);
            parallel_for(
                n_cand,
                [&](std::size_t c) {
                    cands[c] = sample_trajectory(policy, cond, config.frames,
                                                 config.temperature, config.top_k,
                                                 mix_seed(visit_seed, c));
                },
                threads);
            std::vector<Trajectory> trajs;
            trajs.reserve(n_cand);
            for (const TokenizedTrajectory& c : cands) trajs.push_back(detokenize(c.tokens, spec));

            std::vector<PreferencePair> pairs;
            try {
                pairs = build_preference_pairs(
                    cands, score_candidates(prompt, trajs, strategy, ctx), min_gap);
            } catch (const NoPairs&) {
                ++logs.skipped_visits;
                continue;
            }

            std::fill(grad.begin(), grad.end(), 0.0f);
            const auto inv = static_cast<float>(1.0 / static_cast<double>(pairs.size()));
            for (PreferencePair& p : pairs) {
                p.prompt_tags = cond;
                std::fill(pair_grad.begin(), pair_grad.end(), 0.0f);
                loss_sum += dpo_loss_grad(policy, reference, p, config.beta, pair_grad);
                for (std::size_t j = 0; j < np; ++j) grad[j] += inv * pair_grad[j];
                winner_sum += p.winner_score;
                loser_sum += p.loser_score;
            }
            adam.step(policy.params(), grad, config.lr, config.beta1, config.beta2, config.eps);

            pass_pairs += static_cast<std::int64_t>(pairs.size());
            logs.usable_pairs += static_cast<std::int64_t>(pairs.size());
            for (PreferencePair& p : pairs) logs.pairs.push_back(std::move(p));
        }

        const double denom =
            pass_pairs > 0 ? static_cast<double>(pass_pairs) : std::numeric_limits<double>::quiet_NaN();
        logs.pass_mean_loss.push_back(loss_sum / denom);
        logs.pass_mean_winner_score.push_back(winner_sum / denom);
        logs.pass_mean_loser_score.push_back(loser_sum / denom);
        if (probe) logs.pass_probe.push_back(probe(policy));
    }

    if (logs.usable_pairs < 16)
        throw DataTooSmall("dpo_train: fewer than 16 usable preference pairs");
    return logs;
}

void save_pairs(const std::filesystem::path& path, const std::vector<PreferencePair>& pairs) {
    std::vector<std::string> lines;
    lines.reserve(pairs.size());
    for (const PreferencePair& p : pairs) {
        json j;
        j["prompt_tags"] = partial_tags_json(p.prompt_tags);
        j["winner"] = p.winner;
        j["loser"] = p.loser;
        j["winner_score"] = p.winner_score;
        j["loser_score"] = p.loser_score;
        j["strategy"] = std::string(to_string(p.strategy));
        lines.push_back(j.dump());
    }
    write_lines_atomic(path, lines);
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path& path) {
    std::vector<PreferencePair> pairs;
    for (const std::string& line : read_lines(path)) {
        try {
            const json j = json::parse(line);
            PreferencePair p;
            p.prompt_tags = partial_tags_of_json(j.at("prompt_tags"));
            p.winner = j.at("winner").get<std::vector<int>>();
            p.loser = j.at("loser").get<std::vector<int>>();
            p.winner_score = j.at("winner_score").get<double>();
            p.loser_score = j.at("loser_score").get<double>();
            p.strategy = strategy_from_string(j.at("strategy").get<std::string>());
            pairs.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw ParseError(std::string("preference pair line: ") + e.what());
        }
    }
    return pairs;
}

}  // namespace cinecam

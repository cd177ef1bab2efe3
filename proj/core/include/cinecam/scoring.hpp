#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cinecam/dataset.hpp"
#include "cinecam/stage.hpp"
#include "cinecam/taxonomy.hpp"
#include "cinecam/trajectory.hpp"

namespace cinecam {

enum class Strategy : std::uint8_t { tag, regression, cyclic, remote };
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

/// Score of one candidate under one strategy, plus the caption the scorer
/// reconstructed from the rendered framing. Ranges: tag integers 0..9,
/// regression [0,9], cyclic [-1,1], remote as served.
struct ScoreRecord {
    Strategy strategy = Strategy::cyclic;
    double value = 0.0;
    std::string caption;
};

/// Categorical distribution over score digits 0..9.
struct DigitDistribution {
    std::array<double, 10> probs{};
    void validate() const;
    double expectation() const;
};

int round_half_even(double x);

/// Mean over decoding steps of the squared gap between the target digit and
/// each step's expected digit.
double raft_loss(const std::vector<DigitDistribution>& dists, double target);

/// Supervision digit for an interpolation weight: round-half-even of 9*alpha.
int interp_target(double alpha);

ScoreRecord cyclic_score(const Prompt& prompt, const Trajectory& traj,
                         const SubjectProxy& subject, double aspect);

ScoreRecord tag_consistency_score(const PartialShotTags& prompt_tags, const Trajectory& traj,
                                  const SubjectProxy& subject, double aspect);

inline constexpr int kRegressionFeatureDim = 12;

/// Match indicators, framing statistics, and prompt-relative gaps used by
/// the trained scorer. Pure and total: unclassifiable trajectories produce
/// all-zero match indicators rather than errors.
Eigen::VectorXd regression_features(const PartialShotTags& prompt_tags, const Trajectory& traj,
                                    const SubjectProxy& subject, double aspect);

struct RegressionHyper {
    int samples = 256;
    int epochs = 300;
    double lr = 0.1;
};

/// Linear-softmax map from features to a digit distribution.
struct RegressionScorer {
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(10, kRegressionFeatureDim);

    DigitDistribution predict(const Eigen::VectorXd& features) const;
    double value(const Eigen::VectorXd& features) const;
};

/// Fits the scorer on interpolated trajectory pairs: blends records with
/// distinct tags at weight alpha and supervises with interp_target(alpha).
/// Full-batch gradient descent on raft_loss; deterministic in seed.
RegressionScorer train_regression_scorer(const std::vector<DatasetRecord>& dataset,
                                         const RegressionHyper& hyper, std::uint64_t seed);

ScoreRecord regression_score(const RegressionScorer& scorer, const PartialShotTags& prompt_tags,
                             const Trajectory& traj, const SubjectProxy& subject, double aspect);

struct ScoreContext {
    SubjectProxy subject{};
    double aspect = kDefaultAspect;
    const RegressionScorer* regression = nullptr;
    std::string remote_endpoint;
    double remote_timeout_s = 10.0;
};

/// One record per candidate, input order preserved.
std::vector<ScoreRecord> score_candidates(const Prompt& prompt,
                                          const std::vector<Trajectory>& candidates,
                                          Strategy strategy, const ScoreContext& ctx);

}  // namespace cinecam

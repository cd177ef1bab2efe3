#include "cinecam/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "cinecam/caption.hpp"
#include "cinecam/embed.hpp"
#include "cinecam/error.hpp"
#include "cinecam/remote.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::tag: return "tag";
        case Strategy::regression: return "regression";
        case Strategy::cyclic: return "cyclic";
        case Strategy::remote: return "remote";
    }
    throw Unreachable("strategy");
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "tag") return Strategy::tag;
    if (s == "regression") return Strategy::regression;
    if (s == "cyclic") return Strategy::cyclic;
    if (s == "remote") return Strategy::remote;
    throw ParseError("unknown strategy: " + std::string(s));
}

void DigitDistribution::validate() const {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw DomainError("digit distribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("digit distribution: must sum to 1");
}

double DigitDistribution::expectation() const {
    double e = 0.0;
    for (int d = 0; d < 10; ++d) e += probs[static_cast<std::size_t>(d)] * d;
    return e;
}

int round_half_even(double x) {
    const double f = std::floor(x);
    const double r = x - f;
    const int fi = static_cast<int>(f);
    if (r > 0.5) return fi + 1;
    if (r < 0.5) return fi;
    return (fi % 2 == 0) ? fi : fi + 1;
}

double raft_loss(const std::vector<DigitDistribution>& dists, double target) {
    if (dists.empty()) throw DomainError("raft_loss: empty distribution sequence");
    if (target < 0.0 || target > 9.0) throw DomainError("raft_loss: target outside [0,9]");
    double acc = 0.0;
    for (const DigitDistribution& d : dists) {
        const double gap = target - d.expectation();
        acc += gap * gap;
    }
    return acc / static_cast<double>(dists.size());
}

int interp_target(double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw DomainError("interp_target: alpha outside [0,1]");
    return round_half_even(9.0 * alpha);
}

namespace {

struct InverseResult {
    bool classified = false;
    ShotTags tags{};
    std::string caption{kWorstCaption};
};

InverseResult inverse_caption(const Trajectory& traj, const SubjectProxy& subject,
                              double aspect) {
    InverseResult r;
    try {
        r.tags = classify_shot_tags(traj, subject, aspect);
    } catch (const UnclassifiableFraming&) {
        return r;
    } catch (const MotionAmbiguous&) {
        return r;
    }
    r.classified = true;
    r.caption = canonical_caption(r.tags);
    return r;
}

PartialShotTags prompt_tags_of(const Prompt& prompt) {
    if (prompt.tags) return PartialShotTags::from(*prompt.tags);
    return parse_tags_from_prompt(prompt.text);
}

}  // namespace

ScoreRecord cyclic_score(const Prompt& prompt, const Trajectory& traj,
                         const SubjectProxy& subject, double aspect) {
    const InverseResult inv = inverse_caption(traj, subject, aspect);
    ScoreRecord rec;
    rec.strategy = Strategy::cyclic;
    rec.caption = inv.caption;
    rec.value = cosine(embed_text(prompt.text), embed_text(inv.caption));
    return rec;
}

ScoreRecord tag_consistency_score(const PartialShotTags& prompt_tags, const Trajectory& traj,
                                  const SubjectProxy& subject, double aspect) {
    const int specified = prompt_tags.specified_count();
    if (specified == 0) throw EmptyTags("tag score: prompt specifies no dimension");
    const InverseResult inv = inverse_caption(traj, subject, aspect);

    int matched = 0;
    if (inv.classified) {
        if (prompt_tags.motion && *prompt_tags.motion == inv.tags.motion) ++matched;
        if (prompt_tags.scale && *prompt_tags.scale == inv.tags.scale) ++matched;
        if (prompt_tags.direction && *prompt_tags.direction == inv.tags.direction) ++matched;
        if (prompt_tags.angle && *prompt_tags.angle == inv.tags.angle) ++matched;
        if (prompt_tags.screen && *prompt_tags.screen == inv.tags.screen) ++matched;
    }
    ScoreRecord rec;
    rec.strategy = Strategy::tag;
    rec.caption = inv.caption;
    rec.value = round_half_even(9.0 * matched / specified);
    return rec;
}

Eigen::VectorXd regression_features(const PartialShotTags& prompt_tags, const Trajectory& traj,
                                    const SubjectProxy& subject, double aspect) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kRegressionFeatureDim);
    f[0] = 1.0;

    const InverseResult inv = inverse_caption(traj, subject, aspect);
    auto indicator = [&](const auto& want, const auto& got) {
        if (!want) return 0.5;
        if (!inv.classified) return 0.0;
        return *want == got ? 1.0 : 0.0;
    };
    f[1] = indicator(prompt_tags.motion, inv.tags.motion);
    f[2] = indicator(prompt_tags.scale, inv.tags.scale);
    f[3] = indicator(prompt_tags.direction, inv.tags.direction);
    f[4] = indicator(prompt_tags.angle, inv.tags.angle);
    f[5] = indicator(prompt_tags.screen, inv.tags.screen);

    const FramingReport report = framing_report(traj, subject, aspect);
    f[6] = report.miss_rate;

    double rho_sum = 0.0, rho_sq = 0.0, visible = 0.0;
    Vec2 anchor_mean(0.0, 0.0);
    int n_vis = 0;
    for (const FrameFraming& fr : report.frames) {
        if (!fr.visible) continue;
        ++n_vis;
        visible += 1.0;
        rho_sum += fr.rho;
        rho_sq += fr.rho * fr.rho;
        anchor_mean += fr.anchor_uv;
    }
    const double T = static_cast<double>(report.frames.size());
    if (n_vis > 0) {
        const double mean = rho_sum / n_vis;
        const double var = std::max(0.0, rho_sq / n_vis - mean * mean);
        f[7] = std::min(mean, 3.0) / 3.0;
        f[8] = std::min(std::sqrt(var), 1.0);
        if (prompt_tags.scale)
            f[9] = std::min(std::abs(mean - scale_band_target(*prompt_tags.scale)), 2.0) / 2.0;
        if (prompt_tags.screen) {
            anchor_mean /= static_cast<double>(n_vis);
            f[10] = std::min((anchor_mean - screen_cell_target(*prompt_tags.screen)).norm(), 1.0);
        }
    }
    f[11] = visible / T;
    return f;
}

DigitDistribution RegressionScorer::predict(const Eigen::VectorXd& features) const {
    const Eigen::VectorXd z = weights * features;
    const double zmax = z.maxCoeff();
    DigitDistribution d;
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) {
        d.probs[static_cast<std::size_t>(k)] = std::exp(z[k] - zmax);
        sum += d.probs[static_cast<std::size_t>(k)];
    }
    for (double& p : d.probs) p /= sum;
    return d;
}

double RegressionScorer::value(const Eigen::VectorXd& features) const {
    return predict(features).expectation();
}

RegressionScorer train_regression_scorer(const std::vector<DatasetRecord>& dataset,
                                         const RegressionHyper& hyper, std::uint64_t seed) {
    if (hyper.samples < 16) throw DataTooSmall("regression scorer: needs >= 16 samples");
    if (dataset.size() < 2) throw DataTooSmall("regression scorer: needs >= 2 records");

    Rng rng(seed, 0x5c0);
    std::vector<Eigen::VectorXd> feats;
    std::vector<double> targets;
    feats.reserve(static_cast<std::size_t>(hyper.samples));
    for (int s = 0; s < hyper.samples; ++s) {
        std::size_t i = rng.below(dataset.size());
        std::size_t k = rng.below(dataset.size());
        for (int tries = 0; tries < 64 && dataset[k].tags == dataset[i].tags; ++tries)
            k = rng.below(dataset.size());
        if (dataset[k].tags == dataset[i].tags) continue;
        const double alpha = static_cast<double>(rng.below(10)) / 9.0;
        const Trajectory blend =
            trajectory_interpolate(dataset[i].trajectory, dataset[k].trajectory, alpha);
        feats.push_back(regression_features(PartialShotTags::from(dataset[i].tags), blend,
                                            SubjectProxy{}, kDefaultAspect));
        targets.push_back(static_cast<double>(interp_target(alpha)));
    }
    if (feats.size() < 16) throw DataTooSmall("regression scorer: too few usable pairs");

    RegressionScorer scorer;
    const double B = static_cast<double>(feats.size());
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(10, kRegressionFeatureDim);
        for (std::size_t s = 0; s < feats.size(); ++s) {
            const DigitDistribution d = scorer.predict(feats[s]);
            const double e = d.expectation();
            const double scale = 2.0 * (e - targets[s]) / B;
            for (int k = 0; k < 10; ++k) {
                const double dz = scale * d.probs[static_cast<std::size_t>(k)] * (k - e);
                grad.row(k) += dz * feats[s].transpose();
            }
        }
        scorer.weights -= hyper.lr * grad;
    }
    return scorer;
}

ScoreRecord regression_score(const RegressionScorer& scorer, const PartialShotTags& prompt_tags,
                             const Trajectory& traj, const SubjectProxy& subject,
                             double aspect) {
    ScoreRecord rec;
    rec.strategy = Strategy::regression;
    rec.caption = inverse_caption(traj, subject, aspect).caption;
    rec.value = scorer.value(regression_features(prompt_tags, traj, subject, aspect));
    return rec;
}

std::vector<ScoreRecord> score_candidates(const Prompt& prompt,
                                          const std::vector<Trajectory>& candidates,
                                          Strategy strategy, const ScoreContext& ctx) {
    if (candidates.empty()) throw DomainError("score_candidates: no candidates");
    std::vector<ScoreRecord> out;
    out.reserve(candidates.size());
    switch (strategy) {
        case Strategy::cyclic: {
            for (const Trajectory& c : candidates)
                out.push_back(cyclic_score(prompt, c, ctx.subject, ctx.aspect));
            break;
        }
        case Strategy::tag: {
            const PartialShotTags tags = prompt_tags_of(prompt);
            for (const Trajectory& c : candidates)
                out.push_back(tag_consistency_score(tags, c, ctx.subject, ctx.aspect));
            break;
        }
        case Strategy::regression: {
            if (ctx.regression == nullptr)
                throw DomainError("score_candidates: regression scorer not provided");
            const PartialShotTags tags = prompt_tags_of(prompt);
            for (const Trajectory& c : candidates)
                out.push_back(
                    regression_score(*ctx.regression, tags, c, ctx.subject, ctx.aspect));
            break;
        }
        case Strategy::remote: {
            if (ctx.remote_endpoint.empty())
                throw DomainError("score_candidates: remote endpoint not provided");
            RemoteOptions opts;
            opts.timeout_s = ctx.remote_timeout_s;
            for (const Trajectory& c : candidates) {
                const InverseResult inv = inverse_caption(c, ctx.subject, ctx.aspect);
                const FramingReport report = framing_report(c, ctx.subject, ctx.aspect);
                out.push_back(
                    remote_score(ctx.remote_endpoint, prompt, inv.caption, report, opts));
            }
            break;
        }
    }
    return out;
}

}  // namespace cinecam

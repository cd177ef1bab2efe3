#include "cinecam/evaluate.hpp"

#include <numeric>

#include "cinecam/caption.hpp"
#include "cinecam/error.hpp"
#include "cinecam/metrics.hpp"
#include "cinecam/parallel.hpp"
#include "cinecam/rng.hpp"
#include "cinecam/stage.hpp"

namespace cinecam {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(seed, 0xd4a0);
    const std::size_t take = std::min(count, n);
    // partial Fisher-Yates: the first `take` slots are the draw
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(all[i], all[j]);
    }
    all.resize(take);
    return all;
}

std::vector<TrajFeatures> features_of_records(const std::vector<DatasetRecord>& records,
                                              const SubjectProxy& subject, int threads) {
    std::vector<TrajFeatures> out(records.size());
    parallel_for(
        records.size(),
        [&](std::size_t i) { out[i] = trajectory_features(records[i].trajectory, subject); },
        threads);
    return out;
}

EvalDraw sample_eval_draw(const Policy<float>& model, const TokenSpec& spec,
                          const std::vector<Prompt>& prompts, int samples, int frames,
                          double temperature, int top_k, std::uint64_t seed, int threads) {
    if (prompts.empty()) throw DomainError("sample_eval_draw: no prompts");
    if (samples < 1) throw DomainError("sample_eval_draw: samples must be >= 1");
    spec.validate();

    EvalDraw draw;
    draw.trajectories.resize(static_cast<std::size_t>(samples));
    draw.prompts.resize(static_cast<std::size_t>(samples));
    const std::uint64_t base = mix_seed(seed, 0xe7a1);
    parallel_for(
        static_cast<std::size_t>(samples),
        [&](std::size_t i) {
            const Prompt& prompt = prompts[i % prompts.size()];
            const PartialShotTags cond = prompt.tags ? PartialShotTags::from(*prompt.tags)
                                                     : parse_tags_from_prompt(prompt.text);
            const TokenizedTrajectory seq = sample_trajectory(
                model, cond, frames, temperature, top_k, mix_seed(base, i));
            draw.trajectories[i] = detokenize(seq.tokens, spec);
            draw.prompts[i] = prompt;
        },
        threads);
    return draw;
}

EvalReport evaluate_set(const std::vector<Trajectory>& trajectories,
                        const std::vector<Prompt>& prompts,
                        const std::vector<TrajFeatures>& reference, int prdc_k,
                        const SubjectProxy& subject, double aspect, int threads) {
    if (trajectories.size() != prompts.size())
        throw LengthMismatch("evaluate_set: trajectories vs prompts");
    if (trajectories.empty()) throw DomainError("evaluate_set: empty set");

    const std::size_t n = trajectories.size();
    std::vector<TrajFeatures> feats(n);
    std::vector<double> cyc(n), miss(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            feats[i] = trajectory_features(trajectories[i], subject);
            cyc[i] = cyclic_score(prompts[i], trajectories[i], subject, aspect).value;
            miss[i] = framing_report(trajectories[i], subject, aspect).miss_rate;
        },
        threads);

    EvalReport rep;
    rep.frechet = frechet_distance(feats, reference);
    const Prdc p = prdc(feats, reference, prdc_k);
    rep.precision = p.precision;
    rep.recall = p.recall;
    rep.density = p.density;
    rep.coverage = p.coverage;
    double cyc_sum = 0.0, miss_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cyc_sum += cyc[i];
        miss_sum += miss[i];
    }
    rep.semantic_score = 100.0 * cyc_sum / static_cast<double>(n);
    rep.miss_rate = miss_sum / static_cast<double>(n);
    return rep;
}

double mean_miss_rate(const std::vector<Trajectory>& trajectories,
                      const SubjectProxy& subject, double aspect, int threads) {
    if (trajectories.empty()) throw DomainError("mean_miss_rate: empty set");
    std::vector<double> miss(trajectories.size());
    parallel_for(
        trajectories.size(),
        [&](std::size_t i) {
            miss[i] = framing_report(trajectories[i], subject, aspect).miss_rate;
        },
        threads);
    double s = 0.0;
    for (double m : miss) s += m;
    return s / static_cast<double>(miss.size());
}

}  // namespace cinecam

#include <benchmark/benchmark.h>

#include "cinecam/dataset.hpp"
#include "cinecam/features.hpp"
#include "cinecam/metrics.hpp"
#include "cinecam/model.hpp"
#include "cinecam/stage.hpp"
#include "cinecam/synth.hpp"
#include "cinecam/tokenizer.hpp"

namespace {

using namespace cinecam;

Trajectory fixture_trajectory() {
    ShotTags tags;
    tags.motion = Motion::push_in;
    tags.scale = Scale::medium;
    return synth_trajectory(tags, 30, 10.0, SubjectProxy{}, 5);
}

void bm_synth(benchmark::State& state) {
    ShotTags tags;
    tags.motion = Motion::rotate;
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            synth_trajectory(tags, 30, 10.0, SubjectProxy{}, seed++));
}
BENCHMARK(bm_synth);

void bm_classify(benchmark::State& state) {
    const Trajectory traj = fixture_trajectory();
    for (auto _ : state)
        benchmark::DoNotOptimize(classify_shot_tags(traj, SubjectProxy{}, kDefaultAspect));
}
BENCHMARK(bm_classify);

void bm_tokenize_round_trip(benchmark::State& state) {
    const Trajectory traj = fixture_trajectory();
    const TokenSpec spec = default_token_spec();
    const PartialShotTags tags;
    for (auto _ : state) {
        const TokenizedTrajectory seq = tokenize(traj, tags, spec);
        benchmark::DoNotOptimize(detokenize(seq.tokens, spec));
    }
}
BENCHMARK(bm_tokenize_round_trip);

void bm_sequence_logprob(benchmark::State& state) {
    const Policy<float> model(ModelDesc{}, 3);
    const TokenizedTrajectory seq = tokenize(fixture_trajectory(), PartialShotTags{},
                                             default_token_spec());
    for (auto _ : state) benchmark::DoNotOptimize(sequence_logprob(model, seq));
}
BENCHMARK(bm_sequence_logprob);

void bm_sample_trajectory(benchmark::State& state) {
    const Policy<float> model(ModelDesc{}, 3);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sample_trajectory(model, PartialShotTags{}, 30, 1.0, 50, seed++));
}
BENCHMARK(bm_sample_trajectory);

void bm_frechet(benchmark::State& state) {
    DatasetSpec spec;
    spec.count = 64;
    const auto records = synth_dataset(spec, 0);
    std::vector<TrajFeatures> feats;
    for (const auto& r : records)
        feats.push_back(trajectory_features(r.trajectory, spec.subject));
    const std::vector<TrajFeatures> a(feats.begin(), feats.begin() + 32);
    const std::vector<TrajFeatures> b(feats.begin() + 32, feats.end());
    for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(a, b));
}
BENCHMARK(bm_frechet);

}  // namespace

BENCHMARK_MAIN();

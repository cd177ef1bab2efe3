#pragma once

#include <cstdint>
#include <vector>

#include "cinecam/dataset.hpp"
#include "cinecam/features.hpp"
#include "cinecam/model.hpp"
#include "cinecam/scoring.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

/// One evaluated trajectory set against a reference set.
///   frechet        Gaussian feature distance to the reference
///   semantic_score 100 x mean prompt/behavior cosine (cyclic scorer)
///   precision/recall/density/coverage  k-NN manifold estimates
///   miss_rate      mean fraction of frames with the subject lost or in
///                  the outer border
struct EvalReport {
    double frechet = 0.0;
    double semantic_score = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double density = 0.0;
    double coverage = 0.0;
    double miss_rate = 0.0;
};

/// Deterministic without-replacement draw of min(count, n) indices.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

std::vector<TrajFeatures> features_of_records(const std::vector<DatasetRecord>& records,
                                              const SubjectProxy& subject, int threads = 0);

/// Trajectories sampled from a policy, one prompt per sample (prompts
/// cycled when samples exceed them). Deterministic in seed.
struct EvalDraw {
    std::vector<Trajectory> trajectories;
    std::vector<Prompt> prompts;
};
EvalDraw sample_eval_draw(const Policy<float>& model, const TokenSpec& spec,
                          const std::vector<Prompt>& prompts, int samples, int frames,
                          double temperature, int top_k, std::uint64_t seed, int threads = 0);

/// All report fields for one trajectory set (prompt-aligned) against
/// precomputed reference features.
EvalReport evaluate_set(const std::vector<Trajectory>& trajectories,
                        const std::vector<Prompt>& prompts,
                        const std::vector<TrajFeatures>& reference, int prdc_k,
                        const SubjectProxy& subject, double aspect, int threads = 0);

double mean_miss_rate(const std::vector<Trajectory>& trajectories,
                      const SubjectProxy& subject, double aspect, int threads = 0);

}  // namespace cinecam

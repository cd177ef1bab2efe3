#pragma once

#include <vector>

#include "cinecam/features.hpp"

namespace cinecam {

/// Gaussian-fit Fréchet distance between two feature sets:
/// ||mu_a - mu_b||^2 + Tr(Ca + Cb - 2 (Ca Cb)^{1/2}). Covariances use the
/// n-1 normalization plus 1e-6 diagonal shrinkage (small-sample guard).
/// Exactly symmetric; clamped at 0. Throws TooFewSamples below 3 samples.
double frechet_distance(const std::vector<TrajFeatures>& a, const std::vector<TrajFeatures>& b);

struct Prdc {
    double precision = 0.0;
    double recall = 0.0;
    double density = 0.0;
    double coverage = 0.0;
};

/// k-NN manifold estimates of generated vs reference. Balls use the k-th
/// neighbor distance excluding self; features are standardized with the
/// reference set's per-dimension mean/std. Throws TooFewSamples unless both
/// sets exceed k.
Prdc prdc(const std::vector<TrajFeatures>& generated,
          const std::vector<TrajFeatures>& reference, int k);

}  // namespace cinecam

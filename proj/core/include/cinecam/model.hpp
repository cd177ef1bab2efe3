#pragma once

#include <cstdint>
#include <vector>

#include "cinecam/rng.hpp"
#include "cinecam/taxonomy.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

struct ModelDesc {
    int vocab = TokenSpec::kVocab;
    int width = 64;
    int blocks = 2;
    int heads = 4;
    int context = 224;

    void validate() const;
    std::int64_t param_count() const;
    bool operator==(const ModelDesc&) const = default;
};

/// Autoregressive categorical sequence model: causal pre-LN transformer with
/// learned positions and a per-position role mask on the output softmax.
/// Scalar-templated so finite-difference checks can run in double while
/// production runs in float. All operations are deterministic.
template <typename S>
class Policy {
public:
    Policy() = default;
    Policy(const ModelDesc& desc, std::uint64_t seed);

    const ModelDesc& desc() const { return desc_; }
    std::uint64_t init_seed() const { return seed_; }
    std::vector<S>& params() { return params_; }
    const std::vector<S>& params() const { return params_; }

    /// Sum of masked log-softmax probabilities of the realized tokens over
    /// positions with predicted[i] = true.
    double sequence_logprob(const std::vector<int>& tokens, const std::vector<int>& roles,
                            const std::vector<bool>& predicted,
                            const RoleLayout& layout) const;

    /// Adds weight * d(sequence_logprob)/d(params) into grad (grad must be
    /// param-sized); returns the logprob.
    double logprob_grad(const std::vector<int>& tokens, const std::vector<int>& roles,
                        const std::vector<bool>& predicted, const RoleLayout& layout,
                        double weight, std::vector<S>& grad) const;

    /// Mean masked cross-entropy over all predicted positions of the batch
    /// (sequences must share the length of roles/predicted). Gradient is
    /// accumulated when grad != nullptr. Thread count never changes the
    /// result: per-sequence gradients reduce in sequence order.
    double batch_loss(const std::vector<const std::vector<int>*>& batch,
                      const std::vector<int>& roles, const std::vector<bool>& predicted,
                      const RoleLayout& layout, std::vector<S>* grad = nullptr,
                      int threads = 0) const;

    /// Autoregressive role-masked sampling with a KV cache. Positions below
    /// prefix.size() are forced; later ones are drawn with temperature and
    /// top-k within the positional role. top_k is clamped to each role's
    /// size; top_k = 1 decodes greedily (ties break on the lower token id).
    std::vector<int> sample(const std::vector<int>& prefix, const std::vector<int>& roles,
                            const RoleLayout& layout, double temperature, int top_k,
                            Rng& rng) const;

private:
    ModelDesc desc_{};
    std::uint64_t seed_ = 0;
    std::vector<S> params_;
};

extern template class Policy<float>;
extern template class Policy<double>;

/// Adam with bias correction; state sized lazily on first step.
template <typename S>
struct Adam {
    std::vector<S> m, v;
    long long t = 0;

    void step(std::vector<S>& params, const std::vector<S>& grad, double lr,
              double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
};

extern template struct Adam<float>;
extern template struct Adam<double>;

// Trajectory-sequence conveniences (production layout).

template <typename S>
double sequence_logprob(const Policy<S>& model, const TokenizedTrajectory& seq);

template <typename S>
TokenizedTrajectory sample_trajectory(const Policy<S>& model, const PartialShotTags& tags,
                                      int frames, double temperature, int top_k,
                                      std::uint64_t seed);

struct PretrainHyper {
    int epochs = 8;
    int batch = 32;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Minimizes mean token cross-entropy with Adam; returns per-epoch mean
/// training loss. Deterministic in seed.
std::vector<double> pretrain(Policy<float>& model, const std::vector<TokenizedTrajectory>& data,
                             const PretrainHyper& hyper, std::uint64_t seed, int threads = 0);

}  // namespace cinecam

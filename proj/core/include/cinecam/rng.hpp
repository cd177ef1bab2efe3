#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cinecam {

/// splitmix64 step; used to derive well-mixed child seeds from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// 64-bit FNV-1a over raw bytes.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic RNG: std::mt19937_64 engine with hand-rolled distributions.
/// std:: distributions are implementation-defined, so every draw here uses
/// explicit transforms and reproduces bit-identically on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_(seed), engine_(splitmix64(seed)) {}
    Rng(std::uint64_t seed, std::uint64_t stream)
        : base_(mix_seed(seed, stream)), engine_(splitmix64(base_)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for n << 2^64 and keeps draws O(1)
        unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (no cached spare, one pair per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Child generator for parallel-safe per-item streams.
    Rng child(std::uint64_t index) const { return Rng(base_, index); }

    /// Weighted index draw; weights non-negative, sum > 0.
    template <typename Container>
    std::size_t weighted(const Container& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double x = uniform() * total;
        std::size_t i = 0;
        for (double w : weights) {
            if (x < w || i + 1 == static_cast<std::size_t>(weights.size())) return i;
            x -= w;
            ++i;
        }
        return i;
    }

private:
    std::uint64_t base_ = 0;
    std::mt19937_64 engine_;
};

}  // namespace cinecam

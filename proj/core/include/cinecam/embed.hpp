#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "cinecam/taxonomy.hpp"

namespace cinecam {

inline constexpr int kTagBlockDim = kTagAxisCount;
inline constexpr int kBigramBlockDim = 256;
inline constexpr int kEmbeddingDim = kTagBlockDim + kBigramBlockDim;

/// Unit-norm caption embedding: a taxonomy-tag indicator block followed by a
/// hashed word-bigram term-frequency block.
struct CaptionEmbedding {
    Eigen::VectorXd vector = Eigen::VectorXd::Zero(kEmbeddingDim);
};

/// Deterministic text embedder. Tag axes get 1.0 per lexicon match, bigram
/// slots get 0.25 per occurrence (FNV-1a 64 of "w1 w2" mod 256), then the
/// whole vector is L2-normalized. Text with no signal at all maps to the
/// unit vector on the first bigram slot so cosines stay defined.
CaptionEmbedding embed_text(std::string_view text);

double cosine(const CaptionEmbedding& a, const CaptionEmbedding& b);

}  // namespace cinecam

#include "cinecam/embed.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "cinecam/caption.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

namespace {

constexpr double kTagWeight = 1.0;
constexpr double kBigramWeight = 0.25;

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

}  // namespace

CaptionEmbedding embed_text(std::string_view text) {
    CaptionEmbedding e;

    const auto matches = lexicon_matches(text);
    for (int dim = 0; dim < kDimensionCount; ++dim) {
        for (int value : matches[static_cast<std::size_t>(dim)]) {
            int axis;
            if (dim == 0) {
                axis = motion_basic_index(static_cast<Motion>(value));
            } else {
                axis = kDimensionOffsets[static_cast<std::size_t>(dim)] + value;
            }
            e.vector[axis] = kTagWeight;
        }
    }

    const std::vector<std::string> words = words_of(text);
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        const std::string bigram = words[i] + " " + words[i + 1];
        const int slot = static_cast<int>(fnv1a64(bigram.data(), bigram.size()) % 256u);
        e.vector[kTagBlockDim + slot] += kBigramWeight;
    }

    const double n = e.vector.norm();
    if (n < 1e-12) {
        e.vector.setZero();
        e.vector[kTagBlockDim] = 1.0;
    } else {
        e.vector /= n;
    }
    return e;
}

double cosine(const CaptionEmbedding& a, const CaptionEmbedding& b) {
    return a.vector.dot(b.vector);
}

}  // namespace cinecam

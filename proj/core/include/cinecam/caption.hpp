#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cinecam/taxonomy.hpp"

namespace cinecam {

/// Caption used for trajectories whose subject cannot be classified
/// (off-screen); carries no lexicon phrase of any dimension.
inline constexpr std::string_view kWorstCaption = "subject not visible";

/// One English sentence mentioning the canonical lexicon phrase of every
/// dimension. The seed picks among >=3 sentence fragments per dimension;
/// identical (tags, seed) gives an identical caption.
std::string caption_from_tags(const ShotTags& tags, std::uint64_t seed);

/// Caption with the seed derived from the tags themselves, so one tag
/// tuple always maps to one fixed sentence. Used by cyclic scoring.
std::string canonical_caption(const ShotTags& tags);

/// Keyword-lexicon tag extraction. Per dimension, the value whose phrase
/// occurs in the lowercased text wins, longest phrase first; nested
/// matches ("dolly zooms in" over "zooms in") resolve silently. Throws
/// AmbiguousPrompt when two values match with non-nested phrases.
PartialShotTags parse_tags_from_prompt(std::string_view text);

/// All matching values per dimension after nested-match resolution,
/// ambiguity preserved (used by the embedder, which never throws).
/// Values are full-enum indices within each dimension.
std::array<std::vector<int>, kDimensionCount> lexicon_matches(std::string_view text);

/// The lexicon as a versioned plain-text table, one line per value:
/// dimension<TAB>value<TAB>canonical phrase<TAB>alt|alt|...
std::string lexicon_table_text();

}  // namespace cinecam

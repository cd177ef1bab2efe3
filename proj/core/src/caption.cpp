#include "cinecam/caption.hpp"

#include <algorithm>
#include <cctype>

#include "cinecam/error.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

namespace {

struct PhraseSet {
    const char* canonical;
    std::vector<const char*> alts;
};

// Phrases are matched as plain lowercase substrings. Within a dimension,
// every cross-value collision is nested (one phrase contains the other)
// so longest-match resolution stays deterministic.
const std::array<std::vector<PhraseSet>, kDimensionCount>& lexicon() {
    static const std::array<std::vector<PhraseSet>, kDimensionCount> table = {{
        // motion (14 values, enum order)
        {
            {"booms up", {"boom up", "booming up", "cranes up"}},
            {"booms down", {"boom down", "booming down", "cranes down"}},
            {"rotates around", {"rotate around", "rotating around", "orbits", "orbit"}},
            {"trucks left", {"truck left", "trucking left"}},
            {"trucks right", {"truck right", "trucking right"}},
            {"pushes in", {"push in", "pushed in", "pushing in"}},
            {"pulls out", {"pull out", "pulled out", "pulling out"}},
            {"zooms in", {"zoom in", "zooming in"}},
            {"zooms out", {"zoom out", "zooming out"}},
            {"dolly zooms in", {"dolly zoom in", "dolly zooming in"}},
            {"dolly zooms out", {"dolly zoom out", "dolly zooming out"}},
            {"pans", {"pan", "panning"}},
            {"tilts", {"tilt", "tilting"}},
            {"remains static", {"static", "holds still", "stays still"}},
        },
        // scale
        {
            {"extreme close-up", {"extreme close up"}},
            {"close shot", {"close-up", "close up"}},
            {"medium close-up", {"medium close up"}},
            {"medium shot", {}},
            {"long shot", {"wide shot"}},
            {"extreme long shot", {"extreme wide shot"}},
        },
        // direction
        {
            {"from the front", {"head-on"}},
            {"from behind", {"from the back"}},
            {"from the left", {}},
            {"from the right", {}},
            {"from the left front", {}},
            {"from the right front", {}},
            {"from the left back", {}},
            {"from the right back", {}},
        },
        // angle
        {
            {"high angle", {"from above"}},
            {"eye level", {}},
            {"low angle", {"from below"}},
        },
        // screen
        {
            {"upper left of the frame", {"top left"}},
            {"upper center of the frame", {"top center"}},
            {"upper right of the frame", {"top right"}},
            {"middle left of the frame", {}},
            {"middle center of the frame", {"dead center"}},
            {"middle right of the frame", {}},
            {"lower left of the frame", {"bottom left"}},
            {"lower center of the frame", {"bottom center"}},
            {"lower right of the frame", {"bottom right"}},
        },
    }};
    return table;
}

constexpr const char* kDimensionNames[kDimensionCount] = {"motion", "scale", "direction",
                                                          "angle", "screen"};

std::string_view value_name(int dim, int value) {
    switch (dim) {
        case 0: return to_string(static_cast<Motion>(value));
        case 1: return to_string(static_cast<Scale>(value));
        case 2: return to_string(static_cast<Direction>(value));
        case 3: return to_string(static_cast<Angle>(value));
        default: return to_string(static_cast<ScreenPos>(value));
    }
}

// Caption-side insertion text per value; always contains the canonical
// phrase (possibly with an article or preposition wrapped around it).
const std::array<std::vector<const char*>, kDimensionCount>& insertions() {
    static const std::array<std::vector<const char*>, kDimensionCount> table = {{
        {"booms up", "booms down", "rotates around the subject", "trucks left",
         "trucks right", "pushes in", "pulls out", "zooms in", "zooms out",
         "dolly zooms in", "dolly zooms out", "pans", "tilts", "remains static"},
        {"an extreme close-up", "a close shot", "a medium close-up", "a medium shot",
         "a long shot", "an extreme long shot"},
        {"from the front", "from behind", "from the left", "from the right",
         "from the left front", "from the right front", "from the left back",
         "from the right back"},
        {"from a high angle", "at eye level", "from a low angle"},
        {"upper left of the frame", "upper center of the frame", "upper right of the frame",
         "middle left of the frame", "middle center of the frame",
         "middle right of the frame", "lower left of the frame",
         "lower center of the frame", "lower right of the frame"},
    }};
    return table;
}

constexpr const char* kMotionTemplates[] = {"The camera %s", "Slowly the camera %s",
                                            "The shot %s"};
constexpr const char* kScaleTemplates[] = {", framed as %s", ", composed as %s",
                                           ", held in %s"};
constexpr const char* kDirectionTemplates[] = {", viewed %s", ", shot %s", ", observed %s"};
constexpr const char* kAngleTemplates[] = {", captured %s", ", taken %s", ", filmed %s"};
constexpr const char* kScreenTemplates[] = {", keeping the subject at the %s.",
                                            ", with the subject pinned to the %s.",
                                            ", holding the subject in the %s."};

std::string apply(const char* tmpl, const char* insertion) {
    std::string out;
    for (const char* p = tmpl; *p; ++p) {
        if (p[0] == '%' && p[1] == 's') {
            out += insertion;
            ++p;
        } else {
            out += *p;
        }
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

struct Match {
    int value = -1;
    std::string_view phrase;
};

/// Longest matched phrase per value in one dimension, then nested-match
/// resolution: a value loses when its phrase is a substring of another
/// surviving value's phrase.
std::vector<Match> dimension_matches(const std::string& text, int dim) {
    std::vector<Match> found;
    const auto& sets = lexicon()[dim];
    for (int v = 0; v < static_cast<int>(sets.size()); ++v) {
        std::string_view best;
        const PhraseSet& ps = sets[v];
        if (text.find(ps.canonical) != std::string::npos) best = ps.canonical;
        for (const char* alt : ps.alts) {
            const std::string_view a = alt;
            if (a.size() > best.size() && text.find(alt) != std::string::npos) best = a;
        }
        if (!best.empty()) found.push_back({v, best});
    }
    std::sort(found.begin(), found.end(),
              [](const Match& a, const Match& b) { return a.phrase.size() > b.phrase.size(); });
    std::vector<Match> kept;
    for (const Match& m : found) {
        bool nested = false;
        for (const Match& k : kept) {
            if (k.phrase.find(m.phrase) != std::string_view::npos) {
                nested = true;
                break;
            }
        }
        if (!nested) kept.push_back(m);
    }
    return kept;
}

}  // namespace

std::string caption_from_tags(const ShotTags& tags, std::uint64_t seed) {
    Rng rng(seed, 0xca7);
    const auto& ins = insertions();
    std::string out;
    out += apply(kMotionTemplates[rng.below(3)], ins[0][static_cast<int>(tags.motion)]);
    out += apply(kScaleTemplates[rng.below(3)], ins[1][static_cast<int>(tags.scale)]);
    out += apply(kDirectionTemplates[rng.below(3)], ins[2][static_cast<int>(tags.direction)]);
    out += apply(kAngleTemplates[rng.below(3)], ins[3][static_cast<int>(tags.angle)]);
    out += apply(kScreenTemplates[rng.below(3)], ins[4][static_cast<int>(tags.screen)]);
    return out;
}

std::string canonical_caption(const ShotTags& tags) {
    return caption_from_tags(tags, tag_fingerprint(tags));
}

std::array<std::vector<int>, kDimensionCount> lexicon_matches(std::string_view text) {
    const std::string lower = to_lower(text);
    std::array<std::vector<int>, kDimensionCount> out;
    for (int dim = 0; dim < kDimensionCount; ++dim) {
        for (const Match& m : dimension_matches(lower, dim)) out[dim].push_back(m.value);
    }
    return out;
}

PartialShotTags parse_tags_from_prompt(std::string_view text) {
    const std::string lower = to_lower(text);
    PartialShotTags tags;
    for (int dim = 0; dim < kDimensionCount; ++dim) {
        const auto kept = dimension_matches(lower, dim);
        if (kept.empty()) continue;
        if (kept.size() > 1) {
            throw AmbiguousPrompt(std::string("dimension ") + kDimensionNames[dim] +
                                  " matched both '" + std::string(kept[0].phrase) +
                                  "' and '" + std::string(kept[1].phrase) + "'");
        }
        const int v = kept[0].value;
        switch (dim) {
            case 0: tags.motion = static_cast<Motion>(v); break;
            case 1: tags.scale = static_cast<Scale>(v); break;
            case 2: tags.direction = static_cast<Direction>(v); break;
            case 3: tags.angle = static_cast<Angle>(v); break;
            default: tags.screen = static_cast<ScreenPos>(v); break;
        }
    }
    return tags;
}

std::string lexicon_table_text() {
    std::string out = "# lexicon v1: dimension\tvalue\tcanonical\talternates\n";
    for (int dim = 0; dim < kDimensionCount; ++dim) {
        const auto& sets = lexicon()[dim];
        for (int v = 0; v < static_cast<int>(sets.size()); ++v) {
            out += kDimensionNames[dim];
            out += '\t';
            out += value_name(dim, v);
            out += '\t';
            out += sets[v].canonical;
            out += '\t';
            for (std::size_t a = 0; a < sets[v].alts.size(); ++a) {
                if (a) out += '|';
                out += sets[v].alts[a];
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace cinecam

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cinecam/taxonomy.hpp"
#include "cinecam/trajectory.hpp"

namespace cinecam {

struct ChannelRange {
    double min = 0.0;
    double max = 1.0;
    double bin_width() const;
    bool operator==(const ChannelRange&) const = default;
};

/// Vocabulary and quantization grid of the sequence model. Token ids:
/// [0,64) channel bins, [64,103) taxonomy values (trucks collapsed),
/// [103,108) per-dimension "unspecified", 108 BOS, 109 EOS.
struct TokenSpec {
    static constexpr int kBins = 64;
    static constexpr int kChannels = 7;  // x, y, z, yaw, pitch, roll, fov
    static constexpr int kTagBase = kBins;
    static constexpr int kUnspecifiedBase = kTagBase + kTagAxisCount;
    static constexpr int kBos = kUnspecifiedBase + kDimensionCount;
    static constexpr int kEos = kBos + 1;
    static constexpr int kVocab = kEos + 1;

    std::array<ChannelRange, kChannels> absolute;
    std::array<ChannelRange, kChannels> delta;
    double fps = 10.0;

    void validate() const;
    bool operator==(const TokenSpec&) const = default;
};

TokenSpec default_token_spec();

struct TokenizedTrajectory {
    std::vector<int> tokens;
    int clamp_count = 0;  // channel values pulled back into range while quantizing

    bool operator==(const TokenizedTrajectory& o) const { return tokens == o.tokens; }
};

/// Sequence layout: BOS, 5 tag tokens, T frames of 7 channel tokens, EOS.
int sequence_length(int frames);
int frames_of_length(std::size_t length);  // LengthError unless length = 7 + 7T, T >= 2

enum class TokenRole : int {
    bos = 0,
    tag_motion,
    tag_scale,
    tag_direction,
    tag_angle,
    tag_screen,
    channel,
    eos,
};
inline constexpr int kTokenRoleCount = 8;

/// Allowed token ids per role, indexed by role id. The policy consumes this
/// table to mask its softmax; tests may substitute their own layouts.
struct RoleLayout {
    std::vector<std::vector<int>> tokens_per_role;
};

const RoleLayout& trajectory_role_layout();
TokenRole role_of_position(std::size_t pos, std::size_t length);
std::vector<int> trajectory_roles(std::size_t length);
/// True at positions the model predicts (channel tokens and EOS); BOS and
/// the five tag tokens are conditioning.
std::vector<bool> trajectory_predicted(std::size_t length);

/// Nearest-grid-point quantization with values at min + bin*width, so 0 sits
/// exactly on the grid of every symmetric range. `clamped` (optional)
/// increments when v lies outside [min, max].
int quantize_channel(double v, const ChannelRange& r, int* clamped = nullptr);
double dequantize_channel(int bin, const ChannelRange& r);

/// BOS plus the five tag tokens (value token when specified, the
/// dimension's "unspecified" token otherwise): the forced sampling prefix.
std::vector<int> conditioning_tokens(const PartialShotTags& tags);

/// Frame 0 is absolute-coded; later frames code deltas against the
/// *reconstructed* previous frame, so decode error never accumulates.
TokenizedTrajectory tokenize(const Trajectory& traj, const PartialShotTags& tags,
                             const TokenSpec& spec);
Trajectory detokenize(const std::vector<int>& tokens, const TokenSpec& spec);

/// Tags encoded in positions 1..5. The collapsed truck slot comes back as
/// truck_left.
PartialShotTags tags_of_tokens(const std::vector<int>& tokens);

}  // namespace cinecam

#include "cinecam/tokenizer.hpp"

#include <cmath>
#include <string>

#include "cinecam/error.hpp"
#include "cinecam/geometry.hpp"

namespace cinecam {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

constexpr bool is_angle_channel(int c) { return c >= 3 && c <= 5; }

std::array<double, TokenSpec::kChannels> pose_channels(const CameraPose& p) {
    const Euler e = euler_from_quat(p.rotation);
    return {p.translation.x(), p.translation.y(), p.translation.z(),
            e.yaw, e.pitch, e.roll, p.fov};
}

}  // namespace

double ChannelRange::bin_width() const { return (max - min) / TokenSpec::kBins; }

void TokenSpec::validate() const {
    auto check = [](const ChannelRange& r, const char* kind) {
        if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min >= r.max)
            throw DomainError(std::string("token spec: bad ") + kind + " range");
    };
    for (const ChannelRange& r : absolute) check(r, "absolute");
    for (const ChannelRange& r : delta) check(r, "delta");
    if (!(fps > 0.0)) throw DomainError("token spec: fps must be positive");
}

TokenSpec default_token_spec() {
    TokenSpec s;
    // Absolute frame-0 box. Height reaches below the ground plane because
    // genuine low-angle far shots put the camera under the subject's feet.
    s.absolute[0] = {-12.0, 12.0};
    s.absolute[1] = {-2.0, 6.0};
    s.absolute[2] = {-12.0, 12.0};
    s.absolute[3] = {-kPi, kPi};
    // canonical euler pitch never leaves [-pi/2, pi/2], so spending the
    // bins on that interval halves the frame-0 aim error
    s.absolute[4] = {-0.5 * kPi, 0.5 * kPi};
    s.absolute[5] = {-kPi, kPi};
    s.absolute[6] = {rad(10.0), rad(120.0)};
    for (int c = 0; c < 3; ++c) s.delta[static_cast<std::size_t>(c)] = {-0.25, 0.25};
    for (int c = 3; c < 6; ++c) s.delta[static_cast<std::size_t>(c)] = {-rad(6.0), rad(6.0)};
    s.delta[6] = {-rad(2.0), rad(2.0)};
    return s;
}

int sequence_length(int frames) { return 7 + 7 * frames; }

int frames_of_length(std::size_t length) {
    if (length < 7 + 7 * 2 || (length - 7) % 7 != 0)
        throw LengthError("token sequence length " + std::to_string(length) +
                          " is not 7 + 7T with T >= 2");
    return static_cast<int>((length - 7) / 7);
}

const RoleLayout& trajectory_role_layout() {
    static const RoleLayout layout = [] {
        RoleLayout l;
        l.tokens_per_role.resize(kTokenRoleCount);
        l.tokens_per_role[static_cast<int>(TokenRole::bos)] = {TokenSpec::kBos};
        l.tokens_per_role[static_cast<int>(TokenRole::eos)] = {TokenSpec::kEos};
        auto& channel = l.tokens_per_role[static_cast<int>(TokenRole::channel)];
        for (int b = 0; b < TokenSpec::kBins; ++b) channel.push_back(b);
        for (int d = 0; d < kDimensionCount; ++d) {
            auto& role = l.tokens_per_role[static_cast<int>(TokenRole::tag_motion) + d];
            const int off = kDimensionOffsets[static_cast<std::size_t>(d)];
            for (int i = 0; i < kDimensionSizes[static_cast<std::size_t>(d)]; ++i)
                role.push_back(TokenSpec::kTagBase + off + i);
            role.push_back(TokenSpec::kUnspecifiedBase + d);
        }
        return l;
    }();
    return layout;
}

TokenRole role_of_position(std::size_t pos, std::size_t length) {
    frames_of_length(length);
    if (pos >= length) throw LengthError("token position past sequence end");
    if (pos == 0) return TokenRole::bos;
    if (pos <= kDimensionCount)
        return static_cast<TokenRole>(static_cast<int>(TokenRole::tag_motion) + pos - 1);
    if (pos == length - 1) return TokenRole::eos;
    return TokenRole::channel;
}

std::vector<int> trajectory_roles(std::size_t length) {
    std::vector<int> roles(length);
    for (std::size_t i = 0; i < length; ++i)
        roles[i] = static_cast<int>(role_of_position(i, length));
    return roles;
}

std::vector<bool> trajectory_predicted(std::size_t length) {
    frames_of_length(length);
    std::vector<bool> predicted(length, false);
    for (std::size_t i = 1 + kDimensionCount; i < length; ++i) predicted[i] = true;
    return predicted;
}

int quantize_channel(double v, const ChannelRange& r, int* clamped) {
    if (clamped != nullptr && (v < r.min || v > r.max)) ++*clamped;
    const double w = r.bin_width();
    long long b = std::llround((v - r.min) / w);
    if (b < 0) b = 0;
    if (b >= TokenSpec::kBins) b = TokenSpec::kBins - 1;
    return static_cast<int>(b);
}

double dequantize_channel(int bin, const ChannelRange& r) {
    return r.min + bin * r.bin_width();
}

std::vector<int> conditioning_tokens(const PartialShotTags& tags) {
    std::vector<int> out;
    out.reserve(1 + kDimensionCount);
    out.push_back(TokenSpec::kBos);
    auto tag_token = [](int dim, int axis, bool present) {
        return present ? TokenSpec::kTagBase + axis : TokenSpec::kUnspecifiedBase + dim;
    };
    out.push_back(tag_token(0, tags.motion ? tag_axis(*tags.motion) : 0,
                            tags.motion.has_value()));
    out.push_back(tag_token(1, tags.scale ? tag_axis(*tags.scale) : 0,
                            tags.scale.has_value()));
    out.push_back(tag_token(2, tags.direction ? tag_axis(*tags.direction) : 0,
                            tags.direction.has_value()));
    out.push_back(tag_token(3, tags.angle ? tag_axis(*tags.angle) : 0,
                            tags.angle.has_value()));
    out.push_back(tag_token(4, tags.screen ? tag_axis(*tags.screen) : 0,
                            tags.screen.has_value()));
    return out;
}

TokenizedTrajectory tokenize(const Trajectory& traj, const PartialShotTags& tags,
                             const TokenSpec& spec) {
    traj.validate();
    spec.validate();
    const int T = static_cast<int>(traj.poses.size());

    TokenizedTrajectory out;
    out.tokens = conditioning_tokens(tags);
    out.tokens.reserve(static_cast<std::size_t>(sequence_length(T)));

    std::array<double, TokenSpec::kChannels> recon{};
    for (int t = 0; t < T; ++t) {
        const auto raw = pose_channels(traj.poses[static_cast<std::size_t>(t)]);
        for (int c = 0; c < TokenSpec::kChannels; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            int bin;
            if (t == 0) {
                bin = quantize_channel(raw[ci], spec.absolute[ci], &out.clamp_count);
                recon[ci] = dequantize_channel(bin, spec.absolute[ci]);
            } else {
                double d = raw[ci] - recon[ci];
                if (is_angle_channel(c)) d = wrap_angle(d);
                bin = quantize_channel(d, spec.delta[ci], &out.clamp_count);
                recon[ci] += dequantize_channel(bin, spec.delta[ci]);
            }
            out.tokens.push_back(bin);
        }
    }
    out.tokens.push_back(TokenSpec::kEos);
    return out;
}

Trajectory detokenize(const std::vector<int>& tokens, const TokenSpec& spec) {
    spec.validate();
    const int T = frames_of_length(tokens.size());
    const RoleLayout& layout = trajectory_role_layout();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& allowed =
            layout.tokens_per_role[static_cast<int>(role_of_position(i, tokens.size()))];
        bool ok = false;
        for (int id : allowed) ok = ok || id == tokens[i];
        if (!ok)
            throw BadTokenRole("token " + std::to_string(tokens[i]) + " at position " +
                               std::to_string(i) + " violates its role");
    }

    Trajectory traj;
    traj.fps = spec.fps;
    traj.frame = Frame::SubjectLocal;
    traj.poses.reserve(static_cast<std::size_t>(T));

    std::array<double, TokenSpec::kChannels> recon{};
    std::size_t pos = 1 + kDimensionCount;
    for (int t = 0; t < T; ++t) {
        for (int c = 0; c < TokenSpec::kChannels; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            const int bin = tokens[pos++];
            if (t == 0)
                recon[ci] = dequantize_channel(bin, spec.absolute[ci]);
            else
                recon[ci] += dequantize_channel(bin, spec.delta[ci]);
        }
        CameraPose pose;
        pose.translation = Vec3(recon[0], recon[1], recon[2]);
        pose.rotation = quat_from_euler({recon[3], recon[4], recon[5]});
        // delta walks may push fov past its physical bounds; clamp to keep
        // the pose projectable
        pose.fov = std::min(std::max(recon[6], 1e-3), kPi - 1e-3);
        traj.poses.push_back(pose);
    }
    return traj;
}

PartialShotTags tags_of_tokens(const std::vector<int>& tokens) {
    frames_of_length(tokens.size());
    PartialShotTags tags;
    for (int d = 0; d < kDimensionCount; ++d) {
        const int tok = tokens[static_cast<std::size_t>(1 + d)];
        if (tok == TokenSpec::kUnspecifiedBase + d) continue;
        const int idx = tok - TokenSpec::kTagBase - kDimensionOffsets[static_cast<std::size_t>(d)];
        if (idx < 0 || idx >= kDimensionSizes[static_cast<std::size_t>(d)])
            throw BadTokenRole("tag token outside its dimension");
        switch (d) {
            case 0: tags.motion = motion_from_basic_index(idx); break;
            case 1: tags.scale = static_cast<Scale>(idx); break;
            case 2: tags.direction = static_cast<Direction>(idx); break;
            case 3: tags.angle = static_cast<Angle>(idx); break;
            case 4: tags.screen = static_cast<ScreenPos>(idx); break;
        }
    }
    return tags;
}

}  // namespace cinecam

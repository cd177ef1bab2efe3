#include <cmath>
#include <cstddef>
#include <vector>

#include <doctest.h>

#include "cinecam/error.hpp"
#include "cinecam/geometry.hpp"
#include "cinecam/tokenizer.hpp"

using namespace cinecam;

namespace {

// gentle dolly with a slow yaw ramp, comfortably inside every delta range
Trajectory gentle_traj(int T) {
    Trajectory traj;
    traj.fps = 10.0;
    traj.frame = Frame::SubjectLocal;
    for (int t = 0; t < T; ++t) {
        CameraPose p;
        p.translation = Vec3(0.3, 1.1, 4.0 - 0.08 * t);
        p.rotation = quat_from_euler({rad(0.4 * t), rad(-3.0), 0.0});
        p.fov = rad(62.0);
        traj.poses.push_back(p);
    }
    return traj;
}

ShotTags example_tags() {
    ShotTags tags;
    tags.motion = Motion::push_in;
    tags.scale = Scale::long_shot;
    tags.direction = Direction::front;
    tags.angle = Angle::eye_level;
    tags.screen = ScreenPos::middle_center;
    return tags;
}

}  // namespace

TEST_CASE("vocabulary layout") {
    CHECK(TokenSpec::kBins == 64);
    CHECK(TokenSpec::kChannels == 7);
    CHECK(TokenSpec::kTagBase == 64);
    CHECK(TokenSpec::kUnspecifiedBase == 103);
    CHECK(TokenSpec::kBos == 108);
    CHECK(TokenSpec::kEos == 109);
    CHECK(TokenSpec::kVocab == 110);
}

TEST_CASE("sequence length arithmetic") {
    CHECK(sequence_length(2) == 21);
    CHECK(sequence_length(24) == 175);
    CHECK(frames_of_length(21) == 2);
    CHECK(frames_of_length(175) == 24);
    CHECK_THROWS_AS(frames_of_length(14), LengthError);  // T = 1
    CHECK_THROWS_AS(frames_of_length(20), LengthError);
    CHECK_THROWS_AS(frames_of_length(22), LengthError);
    CHECK_THROWS_AS(frames_of_length(0), LengthError);
}

TEST_CASE("token spec validation") {
    TokenSpec spec = default_token_spec();
    CHECK_NOTHROW(spec.validate());
    spec.absolute[0] = {1.0, 1.0};
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec = default_token_spec();
    spec.fps = 0.0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("quantization grid holds zero exactly") {
    const ChannelRange r{-12.0, 12.0};
    CHECK(r.bin_width() == doctest::Approx(0.375));

    // grid nodes of an exactly representable width survive untouched
    for (int k : {0, 1, 13, 32, 63}) {
        const double v = r.min + k * r.bin_width();
        int clamped = 0;
        const int bin = quantize_channel(v, r, &clamped);
        CHECK(bin == k);
        CHECK(clamped == 0);
        CHECK(dequantize_channel(bin, r) == v);
    }
    CHECK(quantize_channel(0.0, r) == 32);
    CHECK(dequantize_channel(32, r) == 0.0);

    // off-node values land on the nearest node
    CHECK(quantize_channel(0.17, r) == 32);
    CHECK(quantize_channel(0.19, r) == 33);
}

TEST_CASE("quantization counts and clamps out-of-range values") {
    const ChannelRange r{-12.0, 12.0};
    int clamped = 0;
    CHECK(quantize_channel(12.4, r, &clamped) == 63);
    CHECK(clamped == 1);
    CHECK(quantize_channel(-12.4, r, &clamped) == 0);
    CHECK(clamped == 2);
    CHECK(quantize_channel(5.0, r, &clamped) > 0);
    CHECK(clamped == 2);
    // null counter is allowed
    CHECK(quantize_channel(12.4, r) == 63);
}

TEST_CASE("conditioning tokens encode specified and missing dimensions") {
    const PartialShotTags full = PartialShotTags::from(example_tags());
    const std::vector<int> tokens = conditioning_tokens(full);
    REQUIRE(tokens.size() == 6);
    CHECK(tokens[0] == TokenSpec::kBos);
    CHECK(tokens[1] == TokenSpec::kTagBase + tag_axis(Motion::push_in));
    CHECK(tokens[2] == TokenSpec::kTagBase + tag_axis(Scale::long_shot));
    CHECK(tokens[3] == TokenSpec::kTagBase + tag_axis(Direction::front));
    CHECK(tokens[4] == TokenSpec::kTagBase + tag_axis(Angle::eye_level));
    CHECK(tokens[5] == TokenSpec::kTagBase + tag_axis(ScreenPos::middle_center));

    PartialShotTags partial;
    partial.scale = Scale::close_up;
    const std::vector<int> sparse = conditioning_tokens(partial);
    CHECK(sparse[1] == TokenSpec::kUnspecifiedBase + 0);
    CHECK(sparse[2] == TokenSpec::kTagBase + tag_axis(Scale::close_up));
    CHECK(sparse[3] == TokenSpec::kUnspecifiedBase + 2);
    CHECK(sparse[4] == TokenSpec::kUnspecifiedBase + 3);
    CHECK(sparse[5] == TokenSpec::kUnspecifiedBase + 4);
}

TEST_CASE("role layout masks each position to its legal tokens") {
    const RoleLayout& layout = trajectory_role_layout();
    REQUIRE(layout.tokens_per_role.size() == kTokenRoleCount);
    CHECK(layout.tokens_per_role[static_cast<int>(TokenRole::bos)] ==
          std::vector<int>{TokenSpec::kBos});
    CHECK(layout.tokens_per_role[static_cast<int>(TokenRole::eos)] ==
          std::vector<int>{TokenSpec::kEos});

    const auto& channel = layout.tokens_per_role[static_cast<int>(TokenRole::channel)];
    REQUIRE(static_cast<int>(channel.size()) == TokenSpec::kBins);
    CHECK(channel.front() == 0);
    CHECK(channel.back() == TokenSpec::kBins - 1);

    for (int d = 0; d < kDimensionCount; ++d) {
        const auto& role =
            layout.tokens_per_role[static_cast<std::size_t>(
                static_cast<int>(TokenRole::tag_motion) + d)];
        REQUIRE(static_cast<int>(role.size()) ==
                kDimensionSizes[static_cast<std::size_t>(d)] + 1);
        CHECK(role.front() ==
              TokenSpec::kTagBase + kDimensionOffsets[static_cast<std::size_t>(d)]);
        CHECK(role.back() == TokenSpec::kUnspecifiedBase + d);
    }
}

TEST_CASE("role of position walks bos, tags, channels, eos") {
    const std::size_t len = 21;  // T = 2
    CHECK(role_of_position(0, len) == TokenRole::bos);
    CHECK(role_of_position(1, len) == TokenRole::tag_motion);
    CHECK(role_of_position(5, len) == TokenRole::tag_screen);
    CHECK(role_of_position(6, len) == TokenRole::channel);
    CHECK(role_of_position(19, len) == TokenRole::channel);
    CHECK(role_of_position(20, len) == TokenRole::eos);
    CHECK_THROWS_AS(role_of_position(21, len), LengthError);
    CHECK_THROWS_AS(role_of_position(0, 20), LengthError);

    const std::vector<int> roles = trajectory_roles(len);
    REQUIRE(roles.size() == len);
    CHECK(roles[0] == static_cast<int>(TokenRole::bos));
    CHECK(roles[7] == static_cast<int>(TokenRole::channel));
    CHECK(roles[20] == static_cast<int>(TokenRole::eos));
}

TEST_CASE("predicted mask covers channels and eos but not the prefix") {
    const std::vector<bool> predicted = trajectory_predicted(21);
    REQUIRE(predicted.size() == 21);
    int on = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) ++on;
        CHECK(predicted[i] == (i >= 6));
    }
    CHECK(on == 15);
}

TEST_CASE("tokenize reconstructs within half a bin and never drifts") {
    const TokenSpec spec = default_token_spec();
    const Trajectory traj = gentle_traj(24);
    const PartialShotTags tags = PartialShotTags::from(example_tags());

    const TokenizedTrajectory tok = tokenize(traj, tags, spec);
    REQUIRE(static_cast<int>(tok.tokens.size()) == sequence_length(24));
    CHECK(tok.clamp_count == 0);
    CHECK(tok.tokens.front() == TokenSpec::kBos);
    CHECK(tok.tokens.back() == TokenSpec::kEos);

    const Trajectory back = detokenize(tok.tokens, spec);
    REQUIRE(back.poses.size() == traj.poses.size());
    CHECK(back.frame == Frame::SubjectLocal);
    CHECK(back.fps == doctest::Approx(spec.fps));

    // absolute coding bounds frame 0; delta coding against the decoded
    // previous frame keeps later frames just as tight instead of drifting
    for (std::size_t t = 0; t < traj.poses.size(); ++t) {
        const CameraPose& a = traj.poses[t];
        const CameraPose& b = back.poses[t];
        const double pos_tol = t == 0 ? 0.28 : 0.007;
        CHECK((a.translation - b.translation).norm() < pos_tol);
        const double rot_tol = t == 0 ? 0.13 : rad(0.35);
        CHECK(2.0 * std::acos(std::min(1.0, std::abs(a.rotation.dot(b.rotation)))) <
              rot_tol);
        const double fov_tol = t == 0 ? rad(0.9) : rad(0.04);
        CHECK(std::abs(a.fov - b.fov) < fov_tol);
    }
}

TEST_CASE("tags travel with the tokens") {
    const TokenSpec spec = default_token_spec();
    const Trajectory traj = gentle_traj(8);

    const PartialShotTags full = PartialShotTags::from(example_tags());
    CHECK(tags_of_tokens(tokenize(traj, full, spec).tokens) == full);

    PartialShotTags sparse;
    sparse.motion = Motion::pan;
    sparse.angle = Angle::high_angle;
    CHECK(tags_of_tokens(tokenize(traj, sparse, spec).tokens) == sparse);

    // the collapsed truck slot always decodes as truck_left
    PartialShotTags truck;
    truck.motion = Motion::truck_right;
    const PartialShotTags decoded = tags_of_tokens(tokenize(traj, truck, spec).tokens);
    REQUIRE(decoded.motion.has_value());
    CHECK(*decoded.motion == Motion::truck_left);
}

TEST_CASE("yaw deltas wrap across the seam") {
    const TokenSpec spec = default_token_spec();
    Trajectory traj;
    traj.fps = 10.0;
    traj.frame = Frame::SubjectLocal;
    for (double yaw : {3.1, -3.1}) {
        CameraPose p;
        p.translation = Vec3(0.0, 1.0, 3.0);
        p.rotation = quat_from_euler({yaw, 0.0, 0.0});
        p.fov = rad(60.0);
        traj.poses.push_back(p);
    }
    // the raw difference is -6.2 rad; wrapped it is ~4.8 degrees, inside
    // the +/-6 degree delta range, so nothing clamps
    const TokenizedTrajectory tok = tokenize(traj, PartialShotTags{}, spec);
    CHECK(tok.clamp_count == 0);
    const Trajectory back = detokenize(tok.tokens, spec);
    const double dot = std::abs(back.poses[1].rotation.dot(traj.poses[1].rotation));
    CHECK(2.0 * std::acos(std::min(1.0, dot)) < rad(0.25));
}

TEST_CASE("tokenize counts clamps outside the coding ranges") {
    const TokenSpec spec = default_token_spec();
    Trajectory traj = gentle_traj(4);
    traj.poses[0].translation.x() = 14.0;             // outside the absolute box
    traj.poses[2].translation.z() += 0.4;             // one step too fast
    const TokenizedTrajectory tok = tokenize(traj, PartialShotTags{}, spec);
    CHECK(tok.clamp_count >= 2);
}

TEST_CASE("detokenize rejects tokens that violate their role") {
    const TokenSpec spec = default_token_spec();
    const TokenizedTrajectory tok =
        tokenize(gentle_traj(4), PartialShotTags::from(example_tags()), spec);

    std::vector<int> bad = tok.tokens;
    bad[0] = 3;  // channel bin where BOS belongs
    CHECK_THROWS_AS(detokenize(bad, spec), BadTokenRole);

    bad = tok.tokens;
    bad[1] = TokenSpec::kTagBase + tag_axis(Scale::close_up);  // scale token in the motion slot
    CHECK_THROWS_AS(detokenize(bad, spec), BadTokenRole);

    bad = tok.tokens;
    bad[8] = TokenSpec::kBos;  // prefix token in a channel slot
    CHECK_THROWS_AS(detokenize(bad, spec), BadTokenRole);

    bad = tok.tokens;
    bad.pop_back();
    CHECK_THROWS_AS(detokenize(bad, spec), LengthError);
}

TEST_CASE("tokenize insists on a valid trajectory") {
    const TokenSpec spec = default_token_spec();
    Trajectory short_traj = gentle_traj(4);
    short_traj.poses.resize(1);
    CHECK_THROWS_AS(tokenize(short_traj, PartialShotTags{}, spec), DomainError);
}

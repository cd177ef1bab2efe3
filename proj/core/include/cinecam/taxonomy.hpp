#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cinecam {

/// Camera movement. truck_left/truck_right are distinct values but count
/// as one basic type (13 basic types over 14 values).
enum class Motion : std::uint8_t {
    boom_up,
    boom_down,
    rotate,
    truck_left,
    truck_right,
    push_in,
    pull_out,
    zoom_in,
    zoom_out,
    dolly_zoom_in,
    dolly_zoom_out,
    pan,
    tilt,
    static_shot,
};
inline constexpr int kMotionCount = 14;
inline constexpr int kMotionBasicCount = 13;

/// Shot scale, ordered from largest subject to smallest.
enum class Scale : std::uint8_t {
    extreme_close,
    close,
    medium_close_up,
    medium,
    long_shot,
    extreme_long,
};
inline constexpr int kScaleCount = 6;

/// Where the camera shoots from, in the subject's own terms.
enum class Direction : std::uint8_t {
    front,
    back,
    left,
    right,
    left_front,
    right_front,
    left_back,
    right_back,
};
inline constexpr int kDirectionCount = 8;

enum class Angle : std::uint8_t { high, eye_level, low };
inline constexpr int kAngleCount = 3;

/// 3x3 image-grid cell holding the subject anchor (v grows downward,
/// so "up_*" is the top row).
enum class ScreenPos : std::uint8_t {
    up_left,
    up_center,
    up_right,
    middle_left,
    middle_center,
    middle_right,
    bottom_left,
    bottom_center,
    bottom_right,
};
inline constexpr int kScreenCount = 9;

inline constexpr int kDimensionCount = 5;
/// Taxonomy value count with trucks collapsed: 13 + 6 + 8 + 3 + 9.
inline constexpr int kTagAxisCount = 39;

struct ShotTags {
    Motion motion = Motion::static_shot;
    Scale scale = Scale::medium;
    Direction direction = Direction::front;
    Angle angle = Angle::eye_level;
    ScreenPos screen = ScreenPos::middle_center;

    bool operator==(const ShotTags&) const = default;
};

/// Prompt-side tags: any subset of dimensions may be present.
struct PartialShotTags {
    std::optional<Motion> motion;
    std::optional<Scale> scale;
    std::optional<Direction> direction;
    std::optional<Angle> angle;
    std::optional<ScreenPos> screen;

    bool operator==(const PartialShotTags&) const = default;
    int specified_count() const;
    static PartialShotTags from(const ShotTags& t);
};

/// A natural-language request for a shot, optionally with the ground-truth
/// tags it was synthesized from.
struct Prompt {
    std::string text;
    std::optional<ShotTags> tags;
};

std::string_view to_string(Motion m);
std::string_view to_string(Scale s);
std::string_view to_string(Direction d);
std::string_view to_string(Angle a);
std::string_view to_string(ScreenPos s);

Motion motion_from_string(std::string_view s);
Scale scale_from_string(std::string_view s);
Direction direction_from_string(std::string_view s);
Angle angle_from_string(std::string_view s);
ScreenPos screen_from_string(std::string_view s);

/// Basic-type index of a motion in 0..12 (trucks share one slot).
int motion_basic_index(Motion m);
std::string_view motion_basic_name(int basic_index);
/// Inverse of motion_basic_index; the truck slot yields truck_left.
Motion motion_from_basic_index(int basic_index);

/// Flat axis of a tag value in the 39-slot taxonomy block:
/// motion basics [0,13), scale [13,19), direction [19,27), angle [27,30),
/// screen [30,39).
int tag_axis(Motion m);
int tag_axis(Scale s);
int tag_axis(Direction d);
int tag_axis(Angle a);
int tag_axis(ScreenPos s);

inline constexpr std::array<int, kDimensionCount> kDimensionSizes = {
    kMotionBasicCount, kScaleCount, kDirectionCount, kAngleCount, kScreenCount};
inline constexpr std::array<int, kDimensionCount> kDimensionOffsets = {0, 13, 19, 27, 30};

/// Stable 64-bit fingerprint of a tag tuple (used for canonical caption
/// seeds and content hashes).
std::uint64_t tag_fingerprint(const ShotTags& t);

}  // namespace cinecam

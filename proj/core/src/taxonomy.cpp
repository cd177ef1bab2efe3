#include "cinecam/taxonomy.hpp"

#include "cinecam/error.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

namespace {

constexpr std::string_view kMotionNames[kMotionCount] = {
    "boom_up",      "boom_down",      "rotate",  "truck_left", "truck_right",
    "push_in",      "pull_out",       "zoom_in", "zoom_out",   "dolly_zoom_in",
    "dolly_zoom_out", "pan",          "tilt",    "static",
};

constexpr std::string_view kMotionBasicNames[kMotionBasicCount] = {
    "boom_up",      "boom_down",      "rotate",  "truck",   "push_in",
    "pull_out",     "zoom_in",        "zoom_out", "dolly_zoom_in",
    "dolly_zoom_out", "pan",          "tilt",    "static",
};

constexpr std::string_view kScaleNames[kScaleCount] = {
    "extreme_close", "close", "medium_close_up", "medium", "long", "extreme_long",
};

constexpr std::string_view kDirectionNames[kDirectionCount] = {
    "front", "back", "left", "right", "left_front", "right_front", "left_back",
    "right_back",
};

constexpr std::string_view kAngleNames[kAngleCount] = {"high", "eye_level", "low"};

constexpr std::string_view kScreenNames[kScreenCount] = {
    "up_left",     "up_center",     "up_right",    "middle_left", "middle_center",
    "middle_right", "bottom_left",  "bottom_center", "bottom_right",
};

template <typename E, int N>
E lookup(std::string_view s, const std::string_view (&names)[N], const char* what) {
    for (int i = 0; i < N; ++i)
        if (names[i] == s) return static_cast<E>(i);
    throw ParseError(std::string("unknown ") + what + " value: " + std::string(s));
}

}  // namespace

int PartialShotTags::specified_count() const {
    return int(motion.has_value()) + int(scale.has_value()) + int(direction.has_value()) +
           int(angle.has_value()) + int(screen.has_value());
}

PartialShotTags PartialShotTags::from(const ShotTags& t) {
    PartialShotTags p;
    p.motion = t.motion;
    p.scale = t.scale;
    p.direction = t.direction;
    p.angle = t.angle;
    p.screen = t.screen;
    return p;
}

std::string_view to_string(Motion m) { return kMotionNames[static_cast<int>(m)]; }
std::string_view to_string(Scale s) { return kScaleNames[static_cast<int>(s)]; }
std::string_view to_string(Direction d) { return kDirectionNames[static_cast<int>(d)]; }
std::string_view to_string(Angle a) { return kAngleNames[static_cast<int>(a)]; }
std::string_view to_string(ScreenPos s) { return kScreenNames[static_cast<int>(s)]; }

Motion motion_from_string(std::string_view s) {
    return lookup<Motion>(s, kMotionNames, "motion");
}
Scale scale_from_string(std::string_view s) {
    return lookup<Scale>(s, kScaleNames, "scale");
}
Direction direction_from_string(std::string_view s) {
    return lookup<Direction>(s, kDirectionNames, "direction");
}
Angle angle_from_string(std::string_view s) {
    return lookup<Angle>(s, kAngleNames, "angle");
}
ScreenPos screen_from_string(std::string_view s) {
    return lookup<ScreenPos>(s, kScreenNames, "screen");
}

int motion_basic_index(Motion m) {
    const int i = static_cast<int>(m);
    const int truck_left = static_cast<int>(Motion::truck_left);
    if (i <= truck_left) return i;                // boom_up..truck_left keep their slot
    return i - 1;                                 // truck_right collapses onto truck_left
}

std::string_view motion_basic_name(int basic_index) {
    return kMotionBasicNames[basic_index];
}

Motion motion_from_basic_index(int basic_index) {
    if (basic_index < 0 || basic_index >= kMotionBasicCount)
        throw DomainError("motion basic index out of range");
    const int truck = motion_basic_index(Motion::truck_left);
    // the collapsed truck slot maps back to truck_left by convention
    if (basic_index <= truck) return static_cast<Motion>(basic_index);
    return static_cast<Motion>(basic_index + 1);
}

int tag_axis(Motion m) { return kDimensionOffsets[0] + motion_basic_index(m); }
int tag_axis(Scale s) { return kDimensionOffsets[1] + static_cast<int>(s); }
int tag_axis(Direction d) { return kDimensionOffsets[2] + static_cast<int>(d); }
int tag_axis(Angle a) { return kDimensionOffsets[3] + static_cast<int>(a); }
int tag_axis(ScreenPos s) { return kDimensionOffsets[4] + static_cast<int>(s); }

std::uint64_t tag_fingerprint(const ShotTags& t) {
    const std::uint8_t bytes[5] = {
        static_cast<std::uint8_t>(t.motion), static_cast<std::uint8_t>(t.scale),
        static_cast<std::uint8_t>(t.direction), static_cast<std::uint8_t>(t.angle),
        static_cast<std::uint8_t>(t.screen)};
    return fnv1a64(bytes, sizeof(bytes));
}

}  // namespace cinecam

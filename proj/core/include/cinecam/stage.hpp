#pragma once

#include <vector>

#include "cinecam/taxonomy.hpp"
#include "cinecam/trajectory.hpp"

namespace cinecam {

inline constexpr double kDefaultAspect = 16.0 / 9.0;
/// Width of the border strip counted as a framing miss.
inline constexpr double kBorderFrac = 0.2;

/// Classification thresholds (per-frame deltas).
inline constexpr double kEpsTrans = 0.01;            // meters
inline constexpr double kEpsRot = 0.5 * kPi / 180.0; // radians
inline constexpr double kEpsFov = 0.2 * kPi / 180.0; // radians

struct FrameFraming {
    Vec2 anchor_uv{-1.0, -1.0};
    double rho = 0.0;      // projected full-body height fraction
    bool visible = false;  // anchor in front of the camera and inside [0,1]^2
    bool in_border = false;
    double distance = 0.0; // camera to subject mid-height, meters
};

struct FramingReport {
    std::vector<FrameFraming> frames;
    double miss_rate = 0.0;
};

/// Pinhole projection of the subject segment for one world-frame pose.
FrameFraming project_subject(const CameraPose& pose, const SubjectProxy& subject,
                             double aspect = kDefaultAspect);

/// Per-frame framing plus the exact miss rate (missing or border frames
/// over T). SubjectLocal input is placed with the given subject first.
FramingReport framing_report(const Trajectory& traj, const SubjectProxy& subject,
                             double aspect = kDefaultAspect);

/// Geometric inverse of synthesis: recovers all five tags from the
/// trajectory. Throws UnclassifiableFraming if any frame loses the
/// subject, MotionAmbiguous when no motion rule fires.
ShotTags classify_shot_tags(const Trajectory& traj, const SubjectProxy& subject,
                            double aspect = kDefaultAspect);

/// Scale band edges on rho (shared by synthesis and classification):
/// extreme_long < .15 <= long < .45 <= medium < .75 <= medium_close_up
/// < 1.1 <= close < 2.0 <= extreme_close.
Scale scale_from_rho(double rho);
double scale_band_target(Scale s);      // synthesis target (band midpoint)
double scale_band_half_width(Scale s);  // jitter base

/// Angle sectors on elevation (radians): low < -10deg <= eye <= +10deg < high.
Angle angle_from_elevation(double elevation);

/// 45-degree azimuth sectors, front centered on the facing direction.
/// Azimuth = atan2(local x, local z); +90deg is the subject's left.
Direction direction_from_azimuth(double azimuth);
double direction_sector_center(Direction d);

ScreenPos screen_from_uv(const Vec2& uv);
/// Cell center clipped to the non-border slab [0.2, 0.8].
Vec2 screen_cell_target(ScreenPos s);

}  // namespace cinecam

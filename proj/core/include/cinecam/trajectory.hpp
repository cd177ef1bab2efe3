#pragma once

#include <vector>

#include "cinecam/geometry.hpp"

namespace cinecam {

/// One camera sample: position, camera-to-world rotation (Hamilton
/// convention), and vertical field of view in radians.
struct CameraPose {
    Vec3 translation{0.0, 0.0, 0.0};
    Quat rotation{1.0, 0.0, 0.0, 0.0};
    double fov = kPi / 3.0;

    CameraPose() = default;
    CameraPose(const Vec3& t, const Quat& q, double fov_radians);

    /// Throws DomainError if the fov leaves (0, pi) or the quaternion
    /// norm has drifted past 1e-9 from unit.
    void validate() const;
};

enum class Frame { SubjectLocal, World };

struct Trajectory {
    std::vector<CameraPose> poses;
    double fps = 10.0;
    Frame frame = Frame::SubjectLocal;

    std::size_t size() const { return poses.size(); }

    /// Throws DomainError on T < 2, non-positive fps, or a bad pose.
    void validate() const;
};

/// Stand-in for the shooting target: a vertical segment of `height`
/// meters rising from `feet`, facing a horizontal unit direction.
struct SubjectProxy {
    Vec3 feet{0.0, 0.0, 0.0};
    double height = 1.7;
    Vec3 facing{0.0, 0.0, 1.0};

    void validate() const;
    Vec3 head() const { return feet + Vec3(0.0, height, 0.0); }
    Vec3 mid() const { return feet + Vec3(0.0, 0.5 * height, 0.0); }

    /// Subject-local-to-world rotation: +Y up, +Z along facing.
    Mat3 basis() const;
};

/// Per-frame blend: translation and fov mixed linearly with weight `alpha`
/// on `a`; rotations slerped from a toward b with parameter (1 - alpha).
/// Throws LengthMismatch when T or fps differ, FrameMismatch when the
/// frames differ.
Trajectory trajectory_interpolate(const Trajectory& a, const Trajectory& b, double alpha);

/// Distance that keeps the projected subject height constant when the
/// FoV changes from f1 to f2: d2 = d1 * tan(f1/2) / tan(f2/2).
double dolly_zoom_distance(double d1, double f1, double f2);

/// Pose at `position` aimed at `target` (camera -Z toward the target).
CameraPose look_at_pose(const Vec3& position, const Vec3& target, const Vec3& up,
                        double fov);

/// Rigidly maps a SubjectLocal trajectory through the subject frame
/// (origin at the feet, +Y up, +Z facing). Throws FrameMismatch when the
/// input is already World.
Trajectory to_world_frame(const Trajectory& traj, const SubjectProxy& subject);

}  // namespace cinecam

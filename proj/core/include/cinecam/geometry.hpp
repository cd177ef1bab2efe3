#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace cinecam {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg(double radians) { return radians * (180.0 / kPi); }
inline double rad(double degrees) { return degrees * (kPi / 180.0); }

/// Spherical interpolation on the shortest arc (q2 negated when dot < 0).
/// t=0 gives q1, t=1 gives q2 up to sign. Result is unit within 1e-9.
Quat slerp(const Quat& q1, const Quat& q2, double t);

Quat quat_from_axis_angle(const Vec3& axis, double angle);

/// Camera-to-world rotation with the camera's local -Z aimed from
/// `position` toward `target`. Throws DegenerateLookAt when the aim
/// direction is parallel to `up` (or position == target) within 1e-9.
Quat look_at_rotation(const Vec3& position, const Vec3& target, const Vec3& up);

/// Heading/pitch/bank Euler angles about the world-up axis:
/// R = Ry(yaw) * Rx(pitch) * Rz(roll). Pitch is confined to (-pi/2, pi/2)
/// which covers every camera orientation produced here (cameras do not
/// aim straight up or down at the subject).
struct Euler {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
};

Euler euler_from_quat(const Quat& q);
Quat quat_from_euler(const Euler& e);

/// Normalized pinhole intrinsics for a vertical FoV (radians) and
/// image aspect = width/height. Principal point fixed at (0.5, 0.5).
struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
};

Intrinsics intrinsics_from_fov(double fov, double aspect);
double fov_from_fy(double fy);

/// Projects a camera-frame point (camera looks along -Z, u right, v down,
/// both normalized to [0,1]). `visible` is false at or behind the camera
/// plane, in which case uv is (-1,-1).
struct Projection {
    Vec2 uv{-1.0, -1.0};
    bool visible = false;
};

Projection project_point(const Vec3& point_cam, const Intrinsics& k);

}  // namespace cinecam

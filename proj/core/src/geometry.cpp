#include "cinecam/geometry.hpp"

#include <cmath>

#include "cinecam/error.hpp"

namespace cinecam {

Quat slerp(const Quat& q1, const Quat& q2, double t) {
    Quat a = q1.normalized();
    Quat b = q2.normalized();
    double d = a.dot(b);
    if (d < 0.0) {
        b.coeffs() = -b.coeffs();
        d = -d;
    }
    if (d > 1.0) d = 1.0;
    const double theta = std::acos(d);
    Quat out;
    if (theta < 1e-9) {
        // nearly parallel: nlerp is exact to working precision here
        out.coeffs() = (1.0 - t) * a.coeffs() + t * b.coeffs();
    } else {
        const double s = std::sin(theta);
        const double wa = std::sin((1.0 - t) * theta) / s;
        const double wb = std::sin(t * theta) / s;
        out.coeffs() = wa * a.coeffs() + wb * b.coeffs();
    }
    out.normalize();
    return out;
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
    return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

Quat look_at_rotation(const Vec3& position, const Vec3& target, const Vec3& up) {
    const Vec3 aim = target - position;
    const double len = aim.norm();
    if (len < 1e-9) throw DegenerateLookAt("look_at: position equals target");
    const Vec3 z_cam = -aim / len;  // camera +Z points away from the target
    Vec3 x_cam = up.normalized().cross(z_cam);
    const double xn = x_cam.norm();
    if (xn < 1e-9) throw DegenerateLookAt("look_at: aim direction parallel to up");
    x_cam /= xn;
    const Vec3 y_cam = z_cam.cross(x_cam);
    Mat3 r;
    r.col(0) = x_cam;
    r.col(1) = y_cam;
    r.col(2) = z_cam;
    return Quat(r).normalized();
}

Euler euler_from_quat(const Quat& q) {
    const Mat3 m = q.normalized().toRotationMatrix();
    Euler e;
    double sp = -m(1, 2);
    if (sp > 1.0) sp = 1.0;
    if (sp < -1.0) sp = -1.0;
    e.pitch = std::asin(sp);
    e.yaw = std::atan2(m(0, 2), m(2, 2));
    e.roll = std::atan2(m(1, 0), m(1, 1));
    return e;
}

Quat quat_from_euler(const Euler& e) {
    return quat_from_axis_angle(Vec3::UnitY(), e.yaw) *
           quat_from_axis_angle(Vec3::UnitX(), e.pitch) *
           quat_from_axis_angle(Vec3::UnitZ(), e.roll);
}

Intrinsics intrinsics_from_fov(double fov, double aspect) {
    if (!(fov > 0.0 && fov < kPi)) throw DomainError("fov out of (0, pi)");
    if (!(aspect > 0.0)) throw DomainError("aspect must be positive");
    Intrinsics k;
    k.fy = 1.0 / (2.0 * std::tan(fov / 2.0));
    k.fx = k.fy / aspect;
    return k;
}

double fov_from_fy(double fy) {
    if (!(fy > 0.0)) throw DomainError("fy must be positive");
    return 2.0 * std::atan(1.0 / (2.0 * fy));
}

Projection project_point(const Vec3& point_cam, const Intrinsics& k) {
    Projection p;
    const double depth = -point_cam.z();
    if (depth <= 1e-12) return p;
    p.uv.x() = 0.5 + k.fx * point_cam.x() / depth;
    p.uv.y() = 0.5 - k.fy * point_cam.y() / depth;
    p.visible = true;
    return p;
}

}  // namespace cinecam

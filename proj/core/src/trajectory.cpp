#include "cinecam/trajectory.hpp"

#include <cmath>

#include "cinecam/error.hpp"

namespace cinecam {

CameraPose::CameraPose(const Vec3& t, const Quat& q, double fov_radians)
    : translation(t), rotation(q.normalized()), fov(fov_radians) {
    if (!(fov > 0.0 && fov < kPi)) throw DomainError("pose fov out of (0, pi)");
}

void CameraPose::validate() const {
    if (!(fov > 0.0 && fov < kPi)) throw DomainError("pose fov out of (0, pi)");
    if (std::abs(rotation.norm() - 1.0) > 1e-9)
        throw DomainError("pose rotation is not unit");
}

void Trajectory::validate() const {
    if (poses.size() < 2) throw DomainError("trajectory needs at least 2 poses");
    if (!(fps > 0.0)) throw DomainError("fps must be positive");
    for (const auto& p : poses) p.validate();
}

void SubjectProxy::validate() const {
    if (!(height > 0.0)) throw DomainError("subject height must be positive");
    if (std::abs(facing.norm() - 1.0) > 1e-9)
        throw DomainError("subject facing is not unit");
    if (std::abs(facing.y()) > 1e-9)
        throw DomainError("subject facing is not horizontal");
}

Mat3 SubjectProxy::basis() const {
    const Vec3 ys = Vec3::UnitY();
    const Vec3 zs = facing.normalized();
    const Vec3 xs = ys.cross(zs);
    Mat3 r;
    r.col(0) = xs;
    r.col(1) = ys;
    r.col(2) = zs;
    return r;
}

Trajectory trajectory_interpolate(const Trajectory& a, const Trajectory& b, double alpha) {
    if (a.poses.size() != b.poses.size() || a.fps != b.fps)
        throw LengthMismatch("interpolate: trajectories differ in T or fps");
    if (a.frame != b.frame)
        throw FrameMismatch("interpolate: trajectories differ in frame");
    Trajectory out;
    out.fps = a.fps;
    out.frame = a.frame;
    out.poses.reserve(a.poses.size());
    for (std::size_t i = 0; i < a.poses.size(); ++i) {
        const CameraPose& pa = a.poses[i];
        const CameraPose& pb = b.poses[i];
        CameraPose p;
        p.translation = alpha * pa.translation + (1.0 - alpha) * pb.translation;
        p.fov = alpha * pa.fov + (1.0 - alpha) * pb.fov;
        p.rotation = slerp(pa.rotation, pb.rotation, 1.0 - alpha);
        out.poses.push_back(p);
    }
    return out;
}

double dolly_zoom_distance(double d1, double f1, double f2) {
    if (!(d1 > 0.0)) throw DomainError("dolly_zoom: distance must be positive");
    if (!(f1 > 0.0 && f1 < kPi) || !(f2 > 0.0 && f2 < kPi))
        throw DomainError("dolly_zoom: fov out of (0, pi)");
    return d1 * std::tan(f1 / 2.0) / std::tan(f2 / 2.0);
}

CameraPose look_at_pose(const Vec3& position, const Vec3& target, const Vec3& up,
                        double fov) {
    return CameraPose(position, look_at_rotation(position, target, up), fov);
}

Trajectory to_world_frame(const Trajectory& traj, const SubjectProxy& subject) {
    if (traj.frame == Frame::World)
        throw FrameMismatch("to_world_frame: trajectory already in world frame");
    subject.validate();
    const Mat3 r = subject.basis();
    const Quat qs = Quat(r).normalized();
    Trajectory out;
    out.fps = traj.fps;
    out.frame = Frame::World;
    out.poses.reserve(traj.poses.size());
    for (const auto& p : traj.poses) {
        CameraPose w;
        w.translation = r * p.translation + subject.feet;
        w.rotation = (qs * p.rotation).normalized();
        w.fov = p.fov;
        out.poses.push_back(w);
    }
    return out;
}

}  // namespace cinecam

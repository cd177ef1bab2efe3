#include "cinecam/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cinecam/error.hpp"

namespace cinecam {

namespace {

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

TrajFeatures trajectory_features(const Trajectory& traj, const SubjectProxy& subject) {
    traj.validate();
    subject.validate();

    const std::size_t T = traj.size();
    std::vector<Vec3> pos(T);
    std::vector<Quat> rot(T);
    if (traj.frame == Frame::World) {
        const Mat3 basis = subject.basis();
        const Mat3 inv = basis.transpose();
        const Quat qb(basis);
        for (std::size_t i = 0; i < T; ++i) {
            pos[i] = inv * (traj.poses[i].translation - subject.feet);
            rot[i] = (qb.conjugate() * traj.poses[i].rotation).normalized();
        }
    } else {
        for (std::size_t i = 0; i < T; ++i) {
            pos[i] = traj.poses[i].translation;
            rot[i] = traj.poses[i].rotation;
        }
    }

    const std::size_t n = T - 1;
    std::vector<double> vx(n), vy(n), vz(n), speed(n), ang(n);
    double path = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 step = pos[i + 1] - pos[i];
        const Vec3 v = step * traj.fps;
        vx[i] = v.x();
        vy[i] = v.y();
        vz[i] = v.z();
        speed[i] = v.norm();
        path += step.norm();
        const double dot = std::clamp(std::abs(rot[i].dot(rot[i + 1])), 0.0, 1.0);
        ang[i] = 2.0 * std::acos(dot) * traj.fps;
    }

    const Vec3 mid(0.0, 0.5 * subject.height, 0.0);
    std::vector<double> fov(T), dist(T);
    for (std::size_t i = 0; i < T; ++i) {
        fov[i] = traj.poses[i].fov;
        dist[i] = (pos[i] - mid).norm();
    }

    TrajFeatures f;
    Eigen::VectorXd& out = f.values;
    const double mvx = mean_of(vx), mvy = mean_of(vy), mvz = mean_of(vz);
    out[0] = mvx;
    out[1] = mvy;
    out[2] = mvz;
    out[3] = std_of(vx, mvx);
    out[4] = std_of(vy, mvy);
    out[5] = std_of(vz, mvz);
    const double ms = mean_of(speed);
    out[6] = ms;
    out[7] = std_of(speed, ms);
    const double ma = mean_of(ang);
    out[8] = ma;
    out[9] = std_of(ang, ma);
    const double mf = mean_of(fov);
    out[10] = mf;
    out[11] = std_of(fov, mf);
    out[12] = *std::max_element(fov.begin(), fov.end()) -
              *std::min_element(fov.begin(), fov.end());
    const double md = mean_of(dist);
    out[13] = md;
    out[14] = std_of(dist, md);
    out[15] = path;
    out[16] = (pos[T - 1] - pos[0]).norm();
    return f;
}

}  // namespace cinecam

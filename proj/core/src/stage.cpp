#include "cinecam/stage.hpp"

#include <algorithm>
#include <cmath>

#include "cinecam/error.hpp"

namespace cinecam {

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double geodesic_angle(const Quat& a, const Quat& b) {
    double d = std::abs(a.dot(b));
    if (d > 1.0) d = 1.0;
    return 2.0 * std::acos(d);
}

/// Azimuths unwrapped against the first value so medians and sweeps are
/// meaningful across the +-pi seam (sweeps here are < pi).
std::vector<double> unwrap(const std::vector<double>& a) {
    std::vector<double> out;
    out.reserve(a.size());
    for (double x : a) {
        if (!out.empty()) {
            while (x - out.front() > kPi) x -= 2.0 * kPi;
            while (x - out.front() < -kPi) x += 2.0 * kPi;
        }
        out.push_back(x);
    }
    return out;
}

double wrap_pi(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

}  // namespace

FrameFraming project_subject(const CameraPose& pose, const SubjectProxy& subject,
                             double aspect) {
    FrameFraming f;
    const Mat3 r_wc = pose.rotation.toRotationMatrix().transpose();
    const Vec3 feet_cam = r_wc * (subject.feet - pose.translation);
    const Vec3 head_cam = r_wc * (subject.head() - pose.translation);
    f.distance = (subject.mid() - pose.translation).norm();

    const Intrinsics k = intrinsics_from_fov(pose.fov, aspect);
    const Projection pf = project_point(feet_cam, k);
    const Projection ph = project_point(head_cam, k);
    if (!pf.visible || !ph.visible) return f;  // behind camera: rho 0, uv (-1,-1)

    f.anchor_uv = 0.5 * (pf.uv + ph.uv);
    f.rho = std::abs(pf.uv.y() - ph.uv.y());
    const double u = f.anchor_uv.x();
    const double v = f.anchor_uv.y();
    f.visible = u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0;
    if (f.visible) {
        f.in_border = u < kBorderFrac || u > 1.0 - kBorderFrac || v < kBorderFrac ||
                      v > 1.0 - kBorderFrac;
    }
    return f;
}

FramingReport framing_report(const Trajectory& traj, const SubjectProxy& subject,
                             double aspect) {
    const Trajectory world =
        traj.frame == Frame::World ? traj : to_world_frame(traj, subject);
    FramingReport report;
    report.frames.reserve(world.poses.size());
    std::size_t missed = 0;
    for (const auto& pose : world.poses) {
        FrameFraming f = project_subject(pose, subject, aspect);
        if (!f.visible || f.in_border) ++missed;
        report.frames.push_back(f);
    }
    report.miss_rate =
        static_cast<double>(missed) / static_cast<double>(world.poses.size());
    return report;
}

Scale scale_from_rho(double rho) {
    if (rho < 0.15) return Scale::extreme_long;
    if (rho < 0.45) return Scale::long_shot;
    if (rho < 0.75) return Scale::medium;
    if (rho < 1.1) return Scale::medium_close_up;
    if (rho < 2.0) return Scale::close;
    return Scale::extreme_close;
}

double scale_band_target(Scale s) {
    switch (s) {
        case Scale::extreme_long: return 0.075;
        case Scale::long_shot: return 0.3;
        case Scale::medium: return 0.6;
        case Scale::medium_close_up: return 0.925;
        case Scale::close: return 1.55;
        case Scale::extreme_close: return 2.5;
    }
    return 0.6;
}

double scale_band_half_width(Scale s) {
    switch (s) {
        case Scale::extreme_long: return 0.075;
        case Scale::long_shot: return 0.15;
        case Scale::medium: return 0.15;
        case Scale::medium_close_up: return 0.175;
        case Scale::close: return 0.45;
        case Scale::extreme_close: return 0.5;  // open band, nominal width
    }
    return 0.15;
}

Angle angle_from_elevation(double elevation) {
    const double lim = rad(10.0);
    if (elevation > lim) return Angle::high;
    if (elevation < -lim) return Angle::low;
    return Angle::eye_level;
}

Direction direction_from_azimuth(double azimuth) {
    const double a = deg(wrap_pi(azimuth));
    if (a > 157.5 || a <= -157.5) return Direction::back;
    if (a > 112.5) return Direction::left_back;
    if (a > 67.5) return Direction::left;
    if (a > 22.5) return Direction::left_front;
    if (a > -22.5) return Direction::front;
    if (a > -67.5) return Direction::right_front;
    if (a > -112.5) return Direction::right;
    return Direction::right_back;
}

double direction_sector_center(Direction d) {
    switch (d) {
        case Direction::front: return 0.0;
        case Direction::back: return kPi;
        case Direction::left: return rad(90.0);
        case Direction::right: return rad(-90.0);
        case Direction::left_front: return rad(45.0);
        case Direction::right_front: return rad(-45.0);
        case Direction::left_back: return rad(135.0);
        case Direction::right_back: return rad(-135.0);
    }
    return 0.0;
}

ScreenPos screen_from_uv(const Vec2& uv) {
    const int col = std::min(2, std::max(0, static_cast<int>(uv.x() * 3.0)));
    const int row = std::min(2, std::max(0, static_cast<int>(uv.y() * 3.0)));
    return static_cast<ScreenPos>(row * 3 + col);
}

Vec2 screen_cell_target(ScreenPos s) {
    const int idx = static_cast<int>(s);
    const int row = idx / 3;
    const int col = idx % 3;
    auto coord = [](int c) {
        // cell intersected with the visible slab [0.2, 0.8]
        if (c == 0) return 0.5 * (0.2 + 1.0 / 3.0);
        if (c == 1) return 0.5;
        return 0.5 * (2.0 / 3.0 + 0.8);
    };
    return {coord(col), coord(row)};
}

ShotTags classify_shot_tags(const Trajectory& traj, const SubjectProxy& subject,
                            double aspect) {
    traj.validate();
    const Trajectory world =
        traj.frame == Frame::World ? traj : to_world_frame(traj, subject);
    const std::size_t n = world.poses.size();

    std::vector<FrameFraming> frames;
    frames.reserve(n);
    for (const auto& pose : world.poses) {
        FrameFraming f = project_subject(pose, subject, aspect);
        if (!f.visible) throw UnclassifiableFraming("subject not visible in some frame");
        frames.push_back(f);
    }

    const Mat3 sb = subject.basis();
    std::vector<double> rho(n), dist(n), azimuth(n), elevation(n), yaw(n), pitch(n);
    Vec2 uv_mean(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = frames[i].rho;
        dist[i] = frames[i].distance;
        uv_mean += frames[i].anchor_uv;
        const Vec3 local = sb.transpose() * (world.poses[i].translation - subject.feet);
        const Vec3 rel = local - Vec3(0.0, 0.5 * subject.height, 0.0);
        azimuth[i] = std::atan2(rel.x(), rel.z());
        elevation[i] = std::atan2(rel.y(), std::hypot(rel.x(), rel.z()));
        const Euler e = euler_from_quat(world.poses[i].rotation);
        yaw[i] = e.yaw;
        pitch[i] = e.pitch;
    }
    uv_mean /= static_cast<double>(n);

    ShotTags tags;
    tags.scale = scale_from_rho(median(rho));
    tags.angle = angle_from_elevation(median(elevation));
    tags.direction = direction_from_azimuth(median(unwrap(azimuth)));
    tags.screen = screen_from_uv(uv_mean);

    // per-frame deltas and net quantities for the motion decision list
    double max_dt = 0.0, max_dang = 0.0, max_dfov = 0.0, path_len = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = (world.poses[i + 1].translation - world.poses[i].translation).norm();
        max_dt = std::max(max_dt, dt);
        path_len += dt;
        max_dang = std::max(max_dang,
                            geodesic_angle(world.poses[i].rotation, world.poses[i + 1].rotation));
        max_dfov = std::max(max_dfov, std::abs(world.poses[i + 1].fov - world.poses[i].fov));
    }
    const Vec3 disp = world.poses[n - 1].translation - world.poses[0].translation;
    const double net_t = disp.norm();
    const double net_ang = geodesic_angle(world.poses[0].rotation, world.poses[n - 1].rotation);
    const double net_fov = world.poses[n - 1].fov - world.poses[0].fov;

    const bool position_fixed = max_dt <= kEpsTrans && net_t <= 3.0 * kEpsTrans;

    // 1. static
    if (position_fixed && max_dang <= kEpsRot && net_ang <= 3.0 * kEpsRot &&
        max_dfov <= kEpsFov && std::abs(net_fov) <= 3.0 * kEpsFov) {
        tags.motion = Motion::static_shot;
        return tags;
    }
    // 2. zoom: fixed position, swept fov
    if (position_fixed && std::abs(net_fov) > 3.0 * kEpsFov) {
        tags.motion = net_fov < 0.0 ? Motion::zoom_in : Motion::zoom_out;
        return tags;
    }
    // 3. pan / tilt: fixed position, swept aim
    if (position_fixed) {
        const auto yaw_u = unwrap(yaw);
        const auto pitch_u = unwrap(pitch);
        const double yaw_sweep = *std::max_element(yaw_u.begin(), yaw_u.end()) -
                                 *std::min_element(yaw_u.begin(), yaw_u.end());
        const double pitch_sweep = *std::max_element(pitch_u.begin(), pitch_u.end()) -
                                   *std::min_element(pitch_u.begin(), pitch_u.end());
        if (std::max(yaw_sweep, pitch_sweep) > rad(3.0)) {
            tags.motion = yaw_sweep >= pitch_sweep ? Motion::pan : Motion::tilt;
            return tags;
        }
        throw MotionAmbiguous("fixed position but no zoom/pan/tilt signature");
    }

    const double rho0 = rho.front();
    double rho_drift = 0.0;
    for (double r : rho) rho_drift = std::max(rho_drift, std::abs(r - rho0) / rho0);
    const double net_dist = dist[n - 1] - dist[0];

    // 4. dolly zoom: real travel with framing size held
    if (std::abs(net_dist) > kEpsTrans * static_cast<double>(n) && rho_drift < 0.01) {
        tags.motion = net_dist < 0.0 ? Motion::dolly_zoom_in : Motion::dolly_zoom_out;
        return tags;
    }

    Vec3 look_mean = Vec3::Zero();
    Vec3 right_mean = Vec3::Zero();
    for (const auto& pose : world.poses) {
        const Mat3 r = pose.rotation.toRotationMatrix();
        look_mean += r * Vec3(0.0, 0.0, -1.0);
        right_mean += r * Vec3(1.0, 0.0, 0.0);
    }
    look_mean.normalize();
    right_mean.normalize();
    const Vec3 disp_dir = disp / net_t;

    // 5. push / pull: travel within ~26 degrees of the look axis; anything
    // looser belongs to the lateral/vertical rules below
    const double cos_look = disp_dir.dot(look_mean);
    if (net_t > 3.0 * kEpsTrans && std::abs(cos_look) > 0.9) {
        tags.motion = cos_look > 0.0 ? Motion::push_in : Motion::pull_out;
        return tags;
    }
    // 6. truck: straight lateral travel
    if (net_t > 3.0 * kEpsTrans && std::abs(disp_dir.dot(right_mean)) > 0.8) {
        double sagitta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 rel = world.poses[i].translation - world.poses[0].translation;
            sagitta = std::max(sagitta, (rel - rel.dot(disp_dir) * disp_dir).norm());
        }
        if (sagitta <= 0.02 * path_len) {
            tags.motion = disp_dir.dot(right_mean) > 0.0 ? Motion::truck_right
                                                         : Motion::truck_left;
            return tags;
        }
    }
    // 7. boom: vertical travel
    if (net_t > 3.0 * kEpsTrans && std::abs(disp.y()) / net_t > 0.8) {
        tags.motion = disp.y() > 0.0 ? Motion::boom_up : Motion::boom_down;
        return tags;
    }
    // 8. rotate: azimuth sweep at near-constant radius
    {
        const auto az_u = unwrap(azimuth);
        const double az_sweep = *std::max_element(az_u.begin(), az_u.end()) -
                                *std::min_element(az_u.begin(), az_u.end());
        const double dist_med = median(dist);
        const double dist_drift = (*std::max_element(dist.begin(), dist.end()) -
                                   *std::min_element(dist.begin(), dist.end())) /
                                  dist_med;
        if (az_sweep > rad(10.0) && dist_drift < 0.05) {
            tags.motion = Motion::rotate;
            return tags;
        }
    }
    throw MotionAmbiguous("no motion rule fired");
}

}  // namespace cinecam

#include <doctest.h>

#include <cmath>

#include "cinecam/error.hpp"
#include "cinecam/trajectory.hpp"

using namespace cinecam;

namespace {

Trajectory line_traj(const Vec3& from, const Vec3& to, int T, double fov) {
    Trajectory t;
    t.fps = 10.0;
    for (int i = 0; i < T; ++i) {
        const double a = static_cast<double>(i) / (T - 1);
        t.poses.emplace_back(from + a * (to - from), Quat::Identity(), fov);
    }
    return t;
}

}  // namespace

TEST_CASE("pose validation") {
    CHECK_THROWS_AS(CameraPose(Vec3::Zero(), Quat::Identity(), 0.0).validate(), DomainError);
    CHECK_THROWS_AS(CameraPose(Vec3::Zero(), Quat::Identity(), kPi).validate(), DomainError);
    Quat q(2.0, 0.0, 0.0, 0.0);  // unnormalized
    CHECK_THROWS_AS(CameraPose(Vec3::Zero(), q, 1.0).validate(), DomainError);
    CHECK_NOTHROW(CameraPose(Vec3::Zero(), Quat::Identity(), 1.0).validate());
}

TEST_CASE("trajectory validation") {
    Trajectory t = line_traj(Vec3::Zero(), Vec3::UnitX(), 2, 1.0);
    CHECK_NOTHROW(t.validate());
    t.fps = 0.0;
    CHECK_THROWS_AS(t.validate(), DomainError);
    t.fps = 10.0;
    t.poses.pop_back();
    CHECK_THROWS_AS(t.validate(), DomainError);
}

TEST_CASE("interpolation endpoints and midpoint") {
    const Trajectory a = line_traj(Vec3(0, 0, 0), Vec3(1, 0, 0), 5, 1.0);
    Trajectory b = line_traj(Vec3(0, 2, 0), Vec3(1, 2, 0), 5, 2.0);
    for (auto& p : b.poses) p.rotation = quat_from_axis_angle(Vec3::UnitY(), rad(40.0));

    const Trajectory at1 = trajectory_interpolate(a, b, 1.0);
    const Trajectory at0 = trajectory_interpolate(a, b, 0.0);
    const Trajectory mid = trajectory_interpolate(a, b, 0.5);
    for (int i = 0; i < 5; ++i) {
        CHECK((at1.poses[i].translation - a.poses[i].translation).norm() < 1e-12);
        CHECK((at0.poses[i].translation - b.poses[i].translation).norm() < 1e-12);
        CHECK(at1.poses[i].fov == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(at0.poses[i].fov == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(mid.poses[i].translation.y() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mid.poses[i].fov == doctest::Approx(1.5).epsilon(1e-12));
        const Quat want = quat_from_axis_angle(Vec3::UnitY(), rad(20.0));
        CHECK(std::abs(mid.poses[i].rotation.dot(want)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("interpolation rejects mismatched inputs") {
    const Trajectory a = line_traj(Vec3::Zero(), Vec3::UnitX(), 5, 1.0);
    Trajectory b = line_traj(Vec3::Zero(), Vec3::UnitX(), 4, 1.0);
    CHECK_THROWS_AS(trajectory_interpolate(a, b, 0.5), LengthMismatch);
    b = a;
    b.fps = 24.0;
    CHECK_THROWS_AS(trajectory_interpolate(a, b, 0.5), LengthMismatch);
    b = a;
    b.frame = Frame::World;
    CHECK_THROWS_AS(trajectory_interpolate(a, b, 0.5), FrameMismatch);
}

TEST_CASE("dolly zoom distance keeps the subject size") {
    // tan(45 deg) = 1, tan of the half fov 2*atan(1/2) is 1/2
    CHECK(dolly_zoom_distance(4.0, rad(90.0), 2.0 * std::atan(0.5)) ==
          doctest::Approx(8.0).epsilon(1e-12));
    CHECK(dolly_zoom_distance(3.7, rad(65.0), rad(65.0)) ==
          doctest::Approx(3.7).epsilon(1e-12));
    // projected size h/(2 d tan(f/2)) is invariant along the schedule
    const double d1 = 2.5, f1 = rad(80.0), f2 = rad(35.0);
    const double d2 = dolly_zoom_distance(d1, f1, f2);
    CHECK(d1 * std::tan(f1 / 2.0) == doctest::Approx(d2 * std::tan(f2 / 2.0)).epsilon(1e-12));
}

TEST_CASE("look_at_pose aims the camera") {
    const CameraPose p = look_at_pose(Vec3(2, 1, 2), Vec3(0, 1, 0), Vec3::UnitY(), rad(60.0));
    const Vec3 fwd = p.rotation * Vec3(0, 0, -1);
    CHECK(fwd.dot(Vec3(-1, 0, -1).normalized()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.fov == doctest::Approx(rad(60.0)).epsilon(1e-12));
}

TEST_CASE("to_world_frame maps through the subject basis") {
    SubjectProxy subject;
    subject.feet = Vec3(1.0, 0.0, 2.0);
    subject.facing = Vec3(1.0, 0.0, 0.0);

    Trajectory local = line_traj(Vec3(0.0, 0.85, 3.0), Vec3(0.0, 0.85, 3.0), 3, 1.2);
    const Trajectory world = to_world_frame(local, subject);
    CHECK(world.frame == Frame::World);
    // local +Z becomes the facing (+X), so (0, .85, 3) lands at feet + (3, .85, 0)
    CHECK((world.poses[0].translation - Vec3(4.0, 0.85, 2.0)).norm() < 1e-12);
    // camera forward (local -Z) now points away from the facing
    const Vec3 fwd = world.poses[0].rotation * Vec3(0, 0, -1);
    CHECK(fwd.dot(Vec3(-1, 0, 0)) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(to_world_frame(world, subject), FrameMismatch);
}

TEST_CASE("subject proxy geometry") {
    SubjectProxy s;
    s.feet = Vec3(0.5, 0.0, -1.0);
    s.height = 1.8;
    CHECK((s.head() - Vec3(0.5, 1.8, -1.0)).norm() < 1e-12);
    CHECK((s.mid() - Vec3(0.5, 0.9, -1.0)).norm() < 1e-12);
    const Mat3 b = s.basis();
    CHECK((b * Vec3::UnitZ() - s.facing).norm() < 1e-12);
    CHECK(std::abs(b.determinant() - 1.0) < 1e-12);

    s.facing = Vec3::Zero();
    CHECK_THROWS_AS(s.validate(), DomainError);
}

#include <doctest.h>

#include <cmath>

#include "cinecam/error.hpp"
#include "cinecam/geometry.hpp"
#include "cinecam/rng.hpp"

using namespace cinecam;

TEST_CASE("intrinsics at 90 degrees, 16:9") {
    const Intrinsics k = intrinsics_from_fov(rad(90.0), 16.0 / 9.0);
    CHECK(k.fy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(k.fx == doctest::Approx(0.28125).epsilon(1e-12));
    CHECK(fov_from_fy(k.fy) == doctest::Approx(rad(90.0)).epsilon(1e-12));
}

TEST_CASE("projection fixed points") {
    const Intrinsics k = intrinsics_from_fov(rad(90.0), 16.0 / 9.0);
    const Projection center = project_point(Vec3(0.0, 0.0, -2.0), k);
    CHECK(center.visible);
    CHECK(center.uv.x() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(center.uv.y() == doctest::Approx(0.5).epsilon(1e-12));

    const Projection off = project_point(Vec3(0.2, 0.1, -1.0), k);
    CHECK(off.uv.x() == doctest::Approx(0.55625).epsilon(1e-12));
    CHECK(off.uv.y() == doctest::Approx(0.45).epsilon(1e-12));

    CHECK_FALSE(project_point(Vec3(0.0, 0.0, 1.0), k).visible);
    CHECK_FALSE(project_point(Vec3(0.0, 0.0, 0.0), k).visible);
}

TEST_CASE("slerp midpoint of a 90 degree yaw") {
    const Quat q1 = Quat::Identity();
    const Quat q2 = quat_from_axis_angle(Vec3::UnitY(), rad(90.0));
    const Quat mid = slerp(q1, q2, 0.5);
    CHECK(mid.w() == doctest::Approx(0.9238795325112867).epsilon(1e-12));
    CHECK(mid.y() == doctest::Approx(0.3826834323650898).epsilon(1e-12));
    CHECK(mid.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mid.z() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("slerp takes the short arc") {
    const Quat q1 = quat_from_axis_angle(Vec3::UnitY(), rad(10.0));
    Quat q2 = quat_from_axis_angle(Vec3::UnitY(), rad(50.0));
    q2.coeffs() = -q2.coeffs();  // same rotation, far hemisphere
    const Quat mid = slerp(q1, q2, 0.5);
    const Quat expect = quat_from_axis_angle(Vec3::UnitY(), rad(30.0));
    CHECK(std::abs(mid.dot(expect)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("slerp endpoints") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const Quat a = quat_from_axis_angle(
            Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(), rng.uniform(0.0, 3.0));
        const Quat b = quat_from_axis_angle(
            Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(), rng.uniform(0.0, 3.0));
        CHECK(std::abs(slerp(a, b, 0.0).dot(a)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(slerp(a, b, 1.0).dot(b)) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(slerp(a, b, 0.37).norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("look_at aims -Z at the target") {
    const Vec3 pos(3.0, 1.5, -2.0);
    const Vec3 target(0.0, 0.85, 0.0);
    const Quat q = look_at_rotation(pos, target, Vec3::UnitY());
    const Vec3 fwd = q * Vec3(0.0, 0.0, -1.0);
    const Vec3 want = (target - pos).normalized();
    CHECK(fwd.dot(want) == doctest::Approx(1.0).epsilon(1e-12));
    // no roll: camera +X stays horizontal
    const Vec3 right = q * Vec3::UnitX();
    CHECK(right.y() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("look_at rejects degenerate aims") {
    CHECK_THROWS_AS(look_at_rotation(Vec3::Zero(), Vec3::Zero(), Vec3::UnitY()),
                    DegenerateLookAt);
    CHECK_THROWS_AS(look_at_rotation(Vec3::Zero(), Vec3(0.0, 2.0, 0.0), Vec3::UnitY()),
                    DegenerateLookAt);
}

TEST_CASE("euler round trip") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Euler e;
        e.yaw = rng.uniform(-kPi, kPi);
        e.pitch = rng.uniform(-1.4, 1.4);
        e.roll = rng.uniform(-kPi, kPi);
        const Euler back = euler_from_quat(quat_from_euler(e));
        CHECK(back.yaw == doctest::Approx(e.yaw).epsilon(1e-9));
        CHECK(back.pitch == doctest::Approx(e.pitch).epsilon(1e-9));
        CHECK(back.roll == doctest::Approx(e.roll).epsilon(1e-9));
    }
}

TEST_CASE("euler of a look_at has zero roll") {
    const Quat q = look_at_rotation(Vec3(2.0, 2.0, 3.0), Vec3(0.0, 0.85, 0.0), Vec3::UnitY());
    const Euler e = euler_from_quat(q);
    CHECK(std::abs(e.roll) < 1e-9);
}

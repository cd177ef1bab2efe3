#include <doctest.h>

#include <set>
#include <string>

#include "cinecam/error.hpp"
#include "cinecam/taxonomy.hpp"

using namespace cinecam;

TEST_CASE("dimension cardinalities") {
    CHECK(kMotionCount == 14);
    CHECK(kMotionBasicCount == 13);
    CHECK(kScaleCount == 6);
    CHECK(kDirectionCount == 8);
    CHECK(kAngleCount == 3);
    CHECK(kScreenCount == 9);
    CHECK(kTagAxisCount == 39);
    int total = 0;
    for (int s : kDimensionSizes) total += s;
    CHECK(total == kTagAxisCount);
    for (int d = 0; d + 1 < kDimensionCount; ++d)
        CHECK(kDimensionOffsets[d] + kDimensionSizes[d] == kDimensionOffsets[d + 1]);
}

TEST_CASE("string round trips over every value") {
    for (int i = 0; i < kMotionCount; ++i) {
        const auto m = static_cast<Motion>(i);
        CHECK(motion_from_string(to_string(m)) == m);
    }
    for (int i = 0; i < kScaleCount; ++i) {
        const auto s = static_cast<Scale>(i);
        CHECK(scale_from_string(to_string(s)) == s);
    }
    for (int i = 0; i < kDirectionCount; ++i) {
        const auto d = static_cast<Direction>(i);
        CHECK(direction_from_string(to_string(d)) == d);
    }
    for (int i = 0; i < kAngleCount; ++i) {
        const auto a = static_cast<Angle>(i);
        CHECK(angle_from_string(to_string(a)) == a);
    }
    for (int i = 0; i < kScreenCount; ++i) {
        const auto s = static_cast<ScreenPos>(i);
        CHECK(screen_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(motion_from_string("saunter"), ParseError);
    CHECK_THROWS_AS(scale_from_string(""), ParseError);
}

TEST_CASE("truck collapse onto one basic slot") {
    CHECK(motion_basic_index(Motion::truck_left) == motion_basic_index(Motion::truck_right));
    std::set<int> slots;
    for (int i = 0; i < kMotionCount; ++i)
        slots.insert(motion_basic_index(static_cast<Motion>(i)));
    CHECK(static_cast<int>(slots.size()) == kMotionBasicCount);
    CHECK(*slots.begin() == 0);
    CHECK(*slots.rbegin() == kMotionBasicCount - 1);

    for (int b = 0; b < kMotionBasicCount; ++b) {
        CHECK(motion_basic_index(motion_from_basic_index(b)) == b);
        CHECK_FALSE(std::string(motion_basic_name(b)).empty());
    }
    CHECK(motion_from_basic_index(motion_basic_index(Motion::truck_right)) ==
          Motion::truck_left);
    CHECK_THROWS_AS(motion_from_basic_index(kMotionBasicCount), DomainError);
}

TEST_CASE("tag axes tile [0, 39) without overlap") {
    std::set<int> axes;
    for (int i = 0; i < kMotionCount; ++i) axes.insert(tag_axis(static_cast<Motion>(i)));
    CHECK(static_cast<int>(axes.size()) == kMotionBasicCount);
    for (int i = 0; i < kScaleCount; ++i) axes.insert(tag_axis(static_cast<Scale>(i)));
    for (int i = 0; i < kDirectionCount; ++i) axes.insert(tag_axis(static_cast<Direction>(i)));
    for (int i = 0; i < kAngleCount; ++i) axes.insert(tag_axis(static_cast<Angle>(i)));
    for (int i = 0; i < kScreenCount; ++i) axes.insert(tag_axis(static_cast<ScreenPos>(i)));
    CHECK(static_cast<int>(axes.size()) == kTagAxisCount);
    CHECK(*axes.begin() == 0);
    CHECK(*axes.rbegin() == kTagAxisCount - 1);

    CHECK(tag_axis(Motion::boom_up) == 0);
    CHECK(tag_axis(Scale::extreme_close) == 13);
    CHECK(tag_axis(Direction::front) == 19);
    CHECK(tag_axis(Angle::high) == 27);
    CHECK(tag_axis(ScreenPos::up_left) == 30);
}

TEST_CASE("partial tags") {
    ShotTags t;
    t.motion = Motion::pan;
    t.scale = Scale::close;
    const PartialShotTags p = PartialShotTags::from(t);
    CHECK(p.specified_count() == 5);
    CHECK(p.motion == Motion::pan);
    CHECK(p.scale == Scale::close);

    PartialShotTags q;
    CHECK(q.specified_count() == 0);
    q.angle = Angle::low;
    CHECK(q.specified_count() == 1);
    CHECK(q != p);
}

TEST_CASE("tag fingerprints separate tuples") {
    ShotTags a;
    ShotTags b;
    b.screen = ScreenPos::bottom_right;
    ShotTags c;
    c.motion = Motion::truck_right;
    CHECK(tag_fingerprint(a) == tag_fingerprint(a));
    CHECK(tag_fingerprint(a) != tag_fingerprint(b));
    CHECK(tag_fingerprint(a) != tag_fingerprint(c));
    // trucks are distinct values even though they share a basic slot
    ShotTags d;
    d.motion = Motion::truck_left;
    CHECK(tag_fingerprint(c) != tag_fingerprint(d));
}

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

#include <doctest.h>

#include "cinecam/caption.hpp"
#include "cinecam/error.hpp"
#include "cinecam/evaluate.hpp"
#include "cinecam/geometry.hpp"
#include "cinecam/stage.hpp"

using namespace cinecam;

namespace {

ModelDesc tiny_desc() {
    ModelDesc d;
    d.vocab = TokenSpec::kVocab;
    d.width = 8;
    d.blocks = 1;
    d.heads = 2;
    d.context = 21;
    return d;
}

// held pose that keeps the subject centered and classifiable
Trajectory held_shot(double distance, double height, int T = 12) {
    Trajectory traj;
    traj.fps = 10.0;
    traj.frame = Frame::SubjectLocal;
    CameraPose p;
    p.translation = Vec3(0.0, height, distance);
    p.fov = rad(70.0);
    traj.poses.assign(static_cast<std::size_t>(T), p);
    return traj;
}

}  // namespace

TEST_CASE("index sampling draws without replacement") {
    const std::vector<std::size_t> draw = sample_indices(10, 4, 77);
    REQUIRE(draw.size() == 4);
    std::set<std::size_t> seen(draw.begin(), draw.end());
    CHECK(seen.size() == 4);
    for (std::size_t i : draw) CHECK(i < 10);

    CHECK(sample_indices(10, 4, 77) == draw);

    // asking for everything returns a permutation
    std::vector<std::size_t> full = sample_indices(6, 6, 3);
    std::sort(full.begin(), full.end());
    std::vector<std::size_t> iota(6);
    std::iota(iota.begin(), iota.end(), std::size_t{0});
    CHECK(full == iota);

    CHECK(sample_indices(5, 9, 1).size() == 5);
    CHECK(sample_indices(5, 0, 1).empty());
}

TEST_CASE("record features match direct extraction") {
    const SubjectProxy subject{};
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 5; ++i) {
        DatasetRecord rec;
        rec.trajectory = held_shot(1.5 + 0.3 * i, 0.8 + 0.05 * i);
        records.push_back(rec);
    }
    const std::vector<TrajFeatures> f1 = features_of_records(records, subject, 1);
    const std::vector<TrajFeatures> f3 = features_of_records(records, subject, 3);
    REQUIRE(f1.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TrajFeatures direct = trajectory_features(records[i].trajectory, subject);
        CHECK((f1[i].values - direct.values).norm() == 0.0);
        CHECK((f3[i].values - direct.values).norm() == 0.0);
    }
}

TEST_CASE("eval draws cycle prompts and respect the seed") {
    const Policy<float> model(tiny_desc(), 19);
    const TokenSpec spec = default_token_spec();

    std::vector<Prompt> prompts(3);
    prompts[0].text = "the camera pushes in";
    prompts[1].text = "the camera booms up";
    prompts[2].text = "the camera pans";

    const EvalDraw draw = sample_eval_draw(model, spec, prompts, 5, 2, 1.0, 50, 7, 1);
    REQUIRE(draw.trajectories.size() == 5);
    REQUIRE(draw.prompts.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(draw.prompts[i].text == prompts[i % 3].text);
        CHECK(draw.trajectories[i].size() == 2);
        CHECK(draw.trajectories[i].frame == Frame::SubjectLocal);
    }

    const EvalDraw same = sample_eval_draw(model, spec, prompts, 5, 2, 1.0, 50, 7, 2);
    const EvalDraw other = sample_eval_draw(model, spec, prompts, 5, 2, 1.0, 50, 8, 1);
    bool any_differs = false;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK((same.trajectories[i].poses[1].translation -
               draw.trajectories[i].poses[1].translation)
                  .norm() == 0.0);
        any_differs = any_differs || (other.trajectories[i].poses[1].translation -
                                      draw.trajectories[i].poses[1].translation)
                                             .norm() != 0.0;
    }
    CHECK(any_differs);

    CHECK_THROWS_AS(sample_eval_draw(model, spec, {}, 5, 2, 1.0, 50, 7), DomainError);
    CHECK_THROWS_AS(sample_eval_draw(model, spec, prompts, 0, 2, 1.0, 50, 7), DomainError);
}

TEST_CASE("evaluating a set against itself saturates the report") {
    const SubjectProxy subject{};
    std::vector<Trajectory> trajs;
    std::vector<Prompt> prompts;
    for (int i = 0; i < 12; ++i) {
        trajs.push_back(held_shot(1.2 + 0.15 * i, 0.7 + 0.03 * i));
        Prompt p;
        p.text = canonical_caption(classify_shot_tags(trajs.back(), subject));
        prompts.push_back(p);
    }
    const std::vector<TrajFeatures> reference = features_of_records(
        [&] {
            std::vector<DatasetRecord> recs(trajs.size());
            for (std::size_t i = 0; i < trajs.size(); ++i) recs[i].trajectory = trajs[i];
            return recs;
        }(),
        subject);

    const EvalReport rep = evaluate_set(trajs, prompts, reference, 3, subject,
                                        kDefaultAspect, 1);
    CHECK(rep.frechet < 1e-8);
    // the prompt is exactly the behavior's own caption, so the cyclic
    // cosine is 1 per sample
    CHECK(rep.semantic_score == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(rep.precision == 1.0);
    CHECK(rep.recall == 1.0);
    CHECK(rep.coverage == 1.0);
    CHECK(rep.miss_rate == 0.0);

    const EvalReport rep3 = evaluate_set(trajs, prompts, reference, 3, subject,
                                         kDefaultAspect, 3);
    CHECK(rep3.frechet == rep.frechet);
    CHECK(rep3.semantic_score == rep.semantic_score);
    CHECK(rep3.miss_rate == rep.miss_rate);

    CHECK_THROWS_AS(evaluate_set(trajs, std::vector<Prompt>(3), reference, 3, subject,
                                 kDefaultAspect),
                    LengthMismatch);
    CHECK_THROWS_AS(evaluate_set({}, {}, reference, 3, subject, kDefaultAspect),
                    DomainError);
}

TEST_CASE("mean miss rate averages per-trajectory framing") {
    const SubjectProxy subject{};
    Trajectory visible = held_shot(1.5, 0.85);
    Trajectory lost = visible;
    for (CameraPose& p : lost.poses) p.rotation = quat_from_euler({kPi, 0.0, 0.0});

    const double mean = mean_miss_rate({visible, lost}, subject, kDefaultAspect);
    CHECK(mean == 0.5);
    CHECK_THROWS_AS(mean_miss_rate({}, subject, kDefaultAspect), DomainError);
}

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "cinecam/dpo.hpp"
#include "cinecam/error.hpp"
#include "cinecam/geometry.hpp"
#include "cinecam/model.hpp"
#include "cinecam/rng.hpp"

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

std::vector<int> tiny_tokens(int variant) {
    Trajectory traj;
    traj.fps = 10.0;
    traj.frame = Frame::SubjectLocal;
    for (int t = 0; t < 2; ++t) {
        CameraPose p;
        p.translation = Vec3(0.2 * variant - 0.7, 1.1, 2.5 + 0.1 * t);
        p.rotation = quat_from_euler({rad(3.0 * variant), rad(-2.0), 0.0});
        p.fov = rad(55.0 + 2 * variant);
        traj.poses.push_back(p);
    }
    PartialShotTags tags;
    tags.motion = Motion::push_in;
    return tokenize(traj, tags, default_token_spec()).tokens;
}

TokenizedTrajectory fake_candidate(int id) {
    TokenizedTrajectory t;
    t.tokens = {id};
    return t;
}

ScoreRecord record(double value) {
    ScoreRecord r;
    r.strategy = Strategy::tag;
    r.value = value;
    return r;
}

// deterministic stand-in scorer: hash the request body so every distinct
// candidate gets a distinct, replayable score
struct HashScorer {
    httplib::Server svr;
    int port = 0;
    std::thread th;

    HashScorer() {
        svr.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
            const double value =
                static_cast<double>(fnv1a64(req.body.data(), req.body.size()) % 1000) / 1000.0;
            res.set_content(nlohmann::json{{"score", value}}.dump(), "application/json");
        });
        port = svr.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }

    ~HashScorer() {
        svr.stop();
        th.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) + "/score";
    }
};

}  // namespace

TEST_CASE("default score gaps per strategy") {
    CHECK(default_score_gap(Strategy::tag) == 1.0);
    CHECK(default_score_gap(Strategy::regression) == 0.5);
    CHECK(default_score_gap(Strategy::cyclic) == 0.05);
    CHECK(default_score_gap(Strategy::remote) == 0.05);
}

TEST_CASE("extreme pairing matches best against worst") {
    const std::vector<TokenizedTrajectory> cands = {fake_candidate(10), fake_candidate(11),
                                                    fake_candidate(12), fake_candidate(13)};
    const std::vector<ScoreRecord> scores = {record(3.0), record(9.0), record(0.0),
                                             record(6.0)};
    const auto pairs = build_preference_pairs(cands, scores, 1.0);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].winner == std::vector<int>{11});
    CHECK(pairs[0].loser == std::vector<int>{12});
    CHECK(pairs[0].winner_score == 9.0);
    CHECK(pairs[0].loser_score == 0.0);
    CHECK(pairs[0].strategy == Strategy::tag);
    CHECK(pairs[1].winner == std::vector<int>{13});
    CHECK(pairs[1].loser == std::vector<int>{10});

    // odd counts leave the median candidate out
    const std::vector<TokenizedTrajectory> five = {fake_candidate(1), fake_candidate(2),
                                                   fake_candidate(3), fake_candidate(4),
                                                   fake_candidate(5)};
    const std::vector<ScoreRecord> spread = {record(9.0), record(7.0), record(5.0),
                                             record(3.0), record(1.0)};
    CHECK(build_preference_pairs(five, spread, 0.0).size() == 2);
}

TEST_CASE("pairing is invariant under candidate order") {
    const std::vector<TokenizedTrajectory> cands = {fake_candidate(12), fake_candidate(10),
                                                    fake_candidate(13), fake_candidate(11)};
    const std::vector<ScoreRecord> scores = {record(0.0), record(3.0), record(6.0),
                                             record(9.0)};
    const auto pairs = build_preference_pairs(cands, scores, 1.0);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].winner == std::vector<int>{11});
    CHECK(pairs[0].loser == std::vector<int>{12});
}

TEST_CASE("pairing drops weak and degenerate pairs") {
    const std::vector<TokenizedTrajectory> close = {fake_candidate(1), fake_candidate(2),
                                                    fake_candidate(3), fake_candidate(4)};
    const std::vector<ScoreRecord> flat = {record(5.0), record(4.9), record(4.85),
                                           record(4.8)};
    CHECK_THROWS_AS(build_preference_pairs(close, flat, 0.5), NoPairs);

    // identical token sequences carry no ranking signal
    const std::vector<TokenizedTrajectory> twins = {fake_candidate(7), fake_candidate(7)};
    const std::vector<ScoreRecord> ranked = {record(9.0), record(1.0)};
    CHECK_THROWS_AS(build_preference_pairs(twins, ranked, 0.5), NoPairs);

    CHECK_THROWS_AS(build_preference_pairs(close, ranked, 0.5), LengthMismatch);
    CHECK_THROWS_AS(
        build_preference_pairs({fake_candidate(1)}, {record(1.0)}, 0.5), DomainError);
    CHECK_THROWS_AS(build_preference_pairs(close, flat, -0.1), DomainError);
}

TEST_CASE("policy equal to reference sits at ln 2 for every beta") {
    const Policy<double> policy(tiny_desc(), 31);
    const Policy<double> reference = policy;
    PreferencePair pair;
    pair.winner = tiny_tokens(0);
    pair.loser = tiny_tokens(1);

    for (double beta : {0.01, 0.1, 0.5, 0.9}) {
        const double loss = dpo_loss(policy, reference, pair, beta);
        CHECK(std::abs(loss - std::log(2.0)) < 1e-15);
    }
    CHECK_THROWS_AS(dpo_loss(policy, reference, pair, 0.0), DomainError);
}

TEST_CASE("preference loss gradient matches finite differences") {
    Policy<double> policy(tiny_desc(), 5);
    const Policy<double> reference(tiny_desc(), 6);
    PreferencePair pair;
    pair.winner = tiny_tokens(2);
    pair.loser = tiny_tokens(3);
    const double beta = 0.3;

    std::vector<double> grad(policy.params().size(), 0.0);
    const double loss = dpo_loss_grad(policy, reference, pair, beta, grad);
    CHECK(loss == doctest::Approx(dpo_loss(policy, reference, pair, beta)).epsilon(1e-12));

    Rng rng(17, 2);
    const double h = 1e-5;
    for (int probe = 0; probe < 10; ++probe) {
        const auto i = static_cast<std::size_t>(rng.below(policy.params().size()));
        const double saved = policy.params()[i];
        policy.params()[i] = saved + h;
        const double up = dpo_loss(policy, reference, pair, beta);
        policy.params()[i] = saved - h;
        const double down = dpo_loss(policy, reference, pair, beta);
        policy.params()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        CHECK(std::abs(numeric - grad[i]) < 1e-6 * std::max(1.0, std::abs(grad[i])));
    }

    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(dpo_loss_grad(policy, reference, pair, beta, wrong), LengthError);
}

TEST_CASE("preference training runs deterministically over a live scorer") {
    HashScorer scorer;
    ScoreContext ctx;
    ctx.remote_endpoint = scorer.endpoint();

    std::vector<Prompt> prompts;
    for (int i = 0; i < 4; ++i) {
        ShotTags tags;
        tags.motion = i % 2 == 0 ? Motion::push_in : Motion::boom_up;
        tags.scale = Scale::medium;
        tags.direction = Direction::front;
        tags.angle = Angle::eye_level;
        tags.screen = ScreenPos::middle_center;
        Prompt p;
        p.tags = tags;
        prompts.push_back(p);
    }

    DpoConfig config;
    config.candidates = 6;
    config.passes = 2;
    config.frames = 2;
    config.min_score_gap = 0.0;
    config.lr = 1e-3;

    auto run = [&](int threads) {
        Policy<float> policy(tiny_desc(), 41);
        const Policy<float> reference = policy;
        DpoLogs logs = dpo_train(policy, reference, prompts, Strategy::remote, ctx,
                                 default_token_spec(), config, 77, threads,
                                 [](const Policy<float>&) { return 42.0; });
        return std::pair<std::vector<float>, DpoLogs>(policy.params(), std::move(logs));
    };

    auto [params1, logs1] = run(1);
    CHECK(logs1.usable_pairs >= 16);
    CHECK(static_cast<std::int64_t>(logs1.pairs.size()) == logs1.usable_pairs);
    REQUIRE(logs1.pass_mean_loss.size() == 2);
    CHECK(logs1.pass_probe == std::vector<double>{42.0, 42.0});
    for (const PreferencePair& p : logs1.pairs) {
        CHECK(p.winner_score > p.loser_score);
        CHECK(p.prompt_tags.specified_count() == 5);
        CHECK(p.strategy == Strategy::remote);
    }

    // per-candidate seed streams make the thread count invisible
    auto [params2, logs2] = run(2);
    CHECK(params1 == params2);
    REQUIRE(logs1.pairs.size() == logs2.pairs.size());
    for (std::size_t i = 0; i < logs1.pairs.size(); ++i) {
        CHECK(logs1.pairs[i].winner == logs2.pairs[i].winner);
        CHECK(logs1.pairs[i].loser == logs2.pairs[i].loser);
        CHECK(logs1.pairs[i].winner_score == logs2.pairs[i].winner_score);
    }

    SUBCASE("trained pairs survive the jsonl round trip") {
        const std::filesystem::path path = "test_dpo_pairs.jsonl";
        save_pairs(path, logs1.pairs);
        const std::vector<PreferencePair> loaded = load_pairs(path);
        std::filesystem::remove(path);
        REQUIRE(loaded.size() == logs1.pairs.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            CHECK(loaded[i].prompt_tags == logs1.pairs[i].prompt_tags);
            CHECK(loaded[i].winner == logs1.pairs[i].winner);
            CHECK(loaded[i].loser == logs1.pairs[i].loser);
            CHECK(loaded[i].winner_score == logs1.pairs[i].winner_score);
            CHECK(loaded[i].loser_score == logs1.pairs[i].loser_score);
            CHECK(loaded[i].strategy == logs1.pairs[i].strategy);
        }
    }
}

TEST_CASE("preference training rejects unusable setups") {
    Policy<float> policy(tiny_desc(), 1);
    const Policy<float> reference = policy;
    ScoreContext ctx;
    DpoConfig config;
    config.frames = 2;

    CHECK_THROWS_AS(dpo_train(policy, reference, {}, Strategy::tag, ctx,
                              default_token_spec(), config, 1),
                    DataTooSmall);

    std::vector<Prompt> prompts(1);
    prompts[0].text = "the camera pans";
    DpoConfig bad = config;
    bad.candidates = 1;
    CHECK_THROWS_AS(dpo_train(policy, reference, prompts, Strategy::tag, ctx,
                              default_token_spec(), bad, 1),
                    DomainError);
}

#include <string>

#include <doctest.h>

#include "cinecam/config.hpp"
#include "cinecam/error.hpp"

using namespace cinecam;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("a bare versioned config yields the defaults") {
    const PipelineConfig c = parse_config_text(R"({"version": 1})");
    CHECK(c.out_dir == "out");
    CHECK(c.seeds.dataset == 1);
    CHECK(c.seeds.model == 2);
    CHECK(c.seeds.dpo == 3);
    CHECK(c.seeds.eval == 7);
    CHECK(c.dataset.count == 2000);
    CHECK(c.heldout == 200);
    CHECK(c.dataset.frames == 30);
    CHECK(c.model == ModelDesc{});
    CHECK(c.strategy == Strategy::cyclic);
    CHECK(c.eval.samples == 500);
    CHECK(c.eval.beta_sweep == std::vector<double>{0.01, 0.5, 0.9});

    // derived mirrors
    CHECK(c.dataset.seed == c.seeds.dataset);
    CHECK(c.dpo.frames == c.dataset.frames);
    CHECK(c.token_spec.fps == c.dataset.fps);
}

TEST_CASE("version handling") {
    CHECK(message_of(R"({})") == "config.version: required");
    CHECK(message_of(R"({"version": 2})").find("expected 1") != std::string::npos);
    CHECK(message_of("{oops").find("invalid JSON") != std::string::npos);
}

TEST_CASE("unknown fields are named and rejected") {
    CHECK(message_of(R"({"version": 1, "depth": 3})") == "config.depth: unknown field");
    CHECK(message_of(R"({"version": 1, "dataset": {"frames_per_shot": 24}})") ==
          "dataset.frames_per_shot: unknown field");
    CHECK(message_of(R"({"version": 1, "seeds": {"shuffle": 4}})") ==
          "seeds.shuffle: unknown field");
    CHECK(message_of(R"({"version": 1, "eval": {"kNN": 5}})") ==
          "eval.kNN: unknown field");
}

TEST_CASE("typed fields reject mismatched json") {
    CHECK(message_of(R"({"version": 1, "dataset": {"count": "many"}})") ==
          "dataset.count: wrong type");
    CHECK(message_of(R"({"version": 1, "dpo": {"beta": []}})") == "dpo.beta: wrong type");
}

TEST_CASE("explicit seeds and frames propagate into the stages") {
    const PipelineConfig c = parse_config_text(R"({
        "version": 1,
        "seeds": {"dataset": 42, "eval": 9},
        "dataset": {"frames": 12, "fps": 24.0, "count": 64, "heldout": 16}
    })");
    CHECK(c.seeds.dataset == 42);
    CHECK(c.seeds.eval == 9);
    CHECK(c.dataset.seed == 42);
    CHECK(c.dataset.frames == 12);
    CHECK(c.dpo.frames == 12);
    CHECK(c.token_spec.fps == 24.0);
    CHECK(c.heldout == 16);
}

TEST_CASE("tokenizer ranges parse or fail loudly") {
    const PipelineConfig c = parse_config_text(R"({
        "version": 1,
        "tokenizer": {"delta": [[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5],
                                [-0.2, 0.2], [-0.2, 0.2], [-0.2, 0.2],
                                [-0.1, 0.1]]}
    })");
    CHECK(c.token_spec.delta[0].min == -0.5);
    CHECK(c.token_spec.delta[6].max == 0.1);
    CHECK(c.token_spec.absolute == default_token_spec().absolute);

    CHECK(message_of(R"({"version": 1, "tokenizer": {"absolute": [[0, 1]]}})")
              .find("tokenizer.absolute") != std::string::npos);
}

TEST_CASE("scorer strategy parses by name") {
    const PipelineConfig c = parse_config_text(
        R"({"version": 1, "scorer": {"strategy": "tag"}})");
    CHECK(c.strategy == Strategy::tag);

    CHECK(message_of(R"({"version": 1, "scorer": {"strategy": "vibes"}})")
              .find("unknown strategy") != std::string::npos);
    // remote needs somewhere to call
    CHECK(message_of(R"({"version": 1, "scorer": {"strategy": "remote"}})")
              .find("remote_endpoint") != std::string::npos);
}

TEST_CASE("semantic validation rejects inconsistent settings") {
    CHECK(message_of(R"({"version": 1, "dataset": {"count": 0}})")
              .find("dataset.count") != std::string::npos);
    CHECK(message_of(R"({"version": 1, "dataset": {"frames": 40}})")
              .find("model.context") != std::string::npos);
    CHECK(message_of(R"({"version": 1, "eval": {"samples": 3, "prdc_k": 3}})")
              .find("eval.samples") != std::string::npos);
    CHECK(message_of(
              R"({"version": 1, "dataset": {"tag_weights": {"motion": [1, 1]}}})")
              .find("tag_weights.motion") != std::string::npos);
}

TEST_CASE("the canonical echo is a parse fixed point") {
    const PipelineConfig c = parse_config_text(R"({
        "version": 1,
        "out_dir": "run7",
        "seeds": {"dataset": 5, "model": 6, "dpo": 7, "eval": 8},
        "dataset": {"count": 128, "heldout": 32, "frames": 10, "fps": 8.0,
                    "subject_height": 1.8,
                    "tag_weights": {"scale": [1, 2, 3, 4, 5, 6]}},
        "model": {"width": 32, "blocks": 1, "heads": 2, "context": 96},
        "pretrain": {"epochs": 2, "batch": 8, "lr": 0.001},
        "dpo": {"beta": 0.25, "candidates": 4, "passes": 2},
        "scorer": {"strategy": "regression", "regression_samples": 32},
        "eval": {"samples": 40, "sweep_samples": 20, "beta_sweep": [0.1, 0.2]}
    })");
    const std::string echo = config_echo_json(c);
    const PipelineConfig reparsed = parse_config_text(echo);
    CHECK(config_echo_json(reparsed) == echo);
    CHECK(reparsed.dataset.tag_distribution.scale == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(reparsed.dpo.beta == 0.25);
    CHECK(reparsed.out_dir == "run7");
}

TEST_CASE("loading a missing config file raises an io error") {
    CHECK_THROWS_AS(load_config("definitely_absent_config.json"), IoError);
}

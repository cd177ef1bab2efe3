#include <string>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "cinecam/error.hpp"
#include "cinecam/remote.hpp"
#include "cinecam/scoring.hpp"

using namespace cinecam;
using nlohmann::json;

namespace {

FramingReport sample_report() {
    FramingReport report;
    FrameFraming a;
    a.anchor_uv = Vec2(0.5, 0.45);
    a.rho = 0.6;
    a.visible = true;
    a.in_border = false;
    FrameFraming b;
    b.anchor_uv = Vec2(0.15, 0.5);
    b.rho = 0.55;
    b.visible = true;
    b.in_border = true;
    report.frames = {a, b};
    report.miss_rate = 0.5;
    return report;
}

Prompt sample_prompt() {
    Prompt p;
    p.text = "the camera pushes in";
    return p;
}

// One process-local scorer stub; each route exercises a failure mode.
struct StubServer {
    httplib::Server svr;
    int port = 0;
    std::thread th;

    StubServer() {
        svr.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
            const json body = json::parse(req.body);
            const double value = 1.0 + 0.5 * static_cast<double>(body.at("frames").size());
            res.set_content(json{{"score", value}}.dump(), "application/json");
        });
        svr.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
            res.set_content("scorer exploded", "text/plain");
        });
        svr.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json at all", "text/plain");
        });
        svr.Post("/noscore", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"value", 3.0}}.dump(), "application/json");
        });
        svr.Post("/strscore", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"score", "high"}}.dump(), "application/json");
        });
        port = svr.bind_to_any_port("127.0.0.1");
        th = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }

    ~StubServer() {
        svr.stop();
        th.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

}  // namespace

TEST_CASE("remote request body carries prompt, caption and framing evidence") {
    const FramingReport report = sample_report();
    const json body = json::parse(
        remote_request_json(sample_prompt(), "the camera trucks left", report));

    CHECK(body.at("prompt").get<std::string>() == "the camera pushes in");
    CHECK(body.at("caption").get<std::string>() == "the camera trucks left");
    REQUIRE(body.at("frames").size() == 2);
    const json& f0 = body["frames"][0];
    CHECK(f0.at("u").get<double>() == doctest::Approx(0.5));
    CHECK(f0.at("v").get<double>() == doctest::Approx(0.45));
    CHECK(f0.at("rho").get<double>() == doctest::Approx(0.6));
    CHECK(f0.at("visible").get<bool>());
    CHECK_FALSE(f0.at("in_border").get<bool>());
    CHECK(body["frames"][1].at("in_border").get<bool>());
}

TEST_CASE("remote score passes the served value through") {
    StubServer server;
    const ScoreRecord rec = remote_score(server.url("/score"), sample_prompt(),
                                         "the camera pushes in", sample_report());
    CHECK(rec.strategy == Strategy::remote);
    // the stub derives its reply from the payload, so this checks the
    // request actually arrived intact
    CHECK(rec.value == doctest::Approx(2.0));
    CHECK(rec.caption == "the camera pushes in");
}

TEST_CASE("remote score rejects bad replies") {
    StubServer server;
    const Prompt prompt = sample_prompt();
    const FramingReport report = sample_report();

    CHECK_THROWS_AS(remote_score(server.url("/fail"), prompt, "c", report), BadResponse);
    CHECK_THROWS_AS(remote_score(server.url("/garbage"), prompt, "c", report), BadResponse);
    CHECK_THROWS_AS(remote_score(server.url("/noscore"), prompt, "c", report), BadResponse);
    CHECK_THROWS_AS(remote_score(server.url("/strscore"), prompt, "c", report), BadResponse);
}

TEST_CASE("remote score reports a dead endpoint as unreachable") {
    RemoteOptions opts;
    opts.timeout_s = 2.0;
    // nothing listens on the discard port
    CHECK_THROWS_AS(remote_score("http://127.0.0.1:9/score", sample_prompt(), "c",
                                 sample_report(), opts),
                    Unreachable);
}

TEST_CASE("remote score wants a full endpoint") {
    CHECK_THROWS_AS(
        remote_score("localhost:8000/score", sample_prompt(), "c", sample_report()),
        DomainError);
}

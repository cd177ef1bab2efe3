#include "cinecam/remote.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "cinecam/error.hpp"
#include "cinecam/scoring.hpp"

namespace cinecam {

using nlohmann::json;

std::string remote_request_json(const Prompt& prompt, const std::string& caption,
                                const FramingReport& report) {
    json frames = json::array();
    for (const FrameFraming& f : report.frames) {
        frames.push_back({{"u", f.anchor_uv.x()},
                          {"v", f.anchor_uv.y()},
                          {"rho", f.rho},
                          {"visible", f.visible},
                          {"in_border", f.in_border}});
    }
    const json body = {{"prompt", prompt.text}, {"caption", caption}, {"frames", frames}};
    return body.dump();
}

namespace {

struct Endpoint {
    std::string base;  // scheme://host:port
    std::string path;
};

Endpoint split_endpoint(const std::string& endpoint) {
    const std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw DomainError("remote endpoint must look like http://host:port/path");
    const std::size_t slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

ScoreRecord remote_score(const std::string& endpoint, const Prompt& prompt,
                         const std::string& caption, const FramingReport& report,
                         const RemoteOptions& opts) {
    const Endpoint ep = split_endpoint(endpoint);
    httplib::Client client(ep.base);
    const auto deadline = std::chrono::microseconds(
        static_cast<long long>(std::llround(opts.timeout_s * 1e6)));
    client.set_connection_timeout(deadline);
    client.set_read_timeout(deadline);
    client.set_write_timeout(deadline);

    const std::string body = remote_request_json(prompt, caption, report);
    httplib::Result res = client.Post(ep.path, body, "application/json");
    if (!res) {
        switch (res.error()) {
            case httplib::Error::Connection:
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::ProxyConnection:
                throw Unreachable("remote scorer: cannot reach " + ep.base);
            case httplib::Error::Read:
            case httplib::Error::Write:
                throw RemoteTimeout("remote scorer: no reply within " +
                                    std::to_string(opts.timeout_s) + " s");
            default:
                throw BadResponse("remote scorer: transport error " +
                                  std::to_string(static_cast<int>(res.error())));
        }
    }
    if (res->status < 200 || res->status >= 300)
        throw BadResponse("remote scorer: HTTP " + std::to_string(res->status));

    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::exception&) {
        throw BadResponse("remote scorer: body is not JSON");
    }
    if (!reply.is_object() || !reply.contains("score") ||
        !reply["score"].is_number())
        throw BadResponse("remote scorer: missing numeric \"score\"");

    ScoreRecord rec;
    rec.strategy = Strategy::remote;
    rec.value = reply["score"].get<double>();
    rec.caption = caption;
    return rec;
}

}  // namespace cinecam

#pragma once

#include <string>

#include "cinecam/stage.hpp"
#include "cinecam/taxonomy.hpp"

namespace cinecam {

struct ScoreRecord;

struct RemoteOptions {
    double timeout_s = 10.0;
};

/// Serialized request body for the external scoring service.
std::string remote_request_json(const Prompt& prompt, const std::string& caption,
                                const FramingReport& report);

/// POSTs the framing evidence to `endpoint` (http://host:port/path) and
/// returns the served scalar. Throws Unreachable when no connection forms,
/// RemoteTimeout when the exchange exceeds the deadline, BadResponse on
/// non-2xx status or a body without a numeric "score".
ScoreRecord remote_score(const std::string& endpoint, const Prompt& prompt,
                         const std::string& caption, const FramingReport& report,
                         const RemoteOptions& opts = {});

}  // namespace cinecam

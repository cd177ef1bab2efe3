#pragma once

#include <string>

#include "cinecam/trajectory.hpp"

namespace cinecam {

/// RealEstate10k-style text: one ASCII line per frame with 19 space
/// separated fields — timestamp_us, fx, fy, cx, cy, 0, 0, then the 12
/// row-major entries of the world-to-camera [R|t]. Intrinsics are
/// normalized (fy from the vertical FoV, fx = fy / aspect, principal
/// point 0.5). Requires a World-frame trajectory.
std::string serialize_re10k(const Trajectory& traj, double image_aspect);

/// Inverse of serialize_re10k. fps is recovered from the timestamp grid
/// (snapped to an integer rate when within 1e-3). Throws ParseError with
/// a 1-based line number on malformed input.
Trajectory parse_re10k(const std::string& text);

}  // namespace cinecam

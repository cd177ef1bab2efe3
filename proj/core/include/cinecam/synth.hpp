#pragma once

#include <cstdint>

#include "cinecam/stage.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

struct SynthOptions {
    /// Scales all placement jitter; 0 gives the fully deterministic
    /// sector-center configuration.
    double jitter = 1.0;
    double aspect = kDefaultAspect;
    /// Token spec the verification round trip runs under; null means the
    /// default spec.
    const TokenSpec* codec = nullptr;
};

/// Builds a SubjectLocal trajectory that classify_shot_tags maps back to
/// `tags` on every dimension and whose subject anchor stays outside the
/// border region in every frame; both properties are also verified on the
/// tokenize/detokenize reconstruction, so training sequences stay
/// tag-consistent under the codec. Placement: distance solved from the
/// scale-band target rho (anchor pinned to the screen-cell target by a
/// per-frame aim solve), azimuth/elevation from sector centers plus
/// bounded jitter. Retries with fresh jitter up to 48 times, then throws
/// InfeasibleTags.
Trajectory synth_trajectory(const ShotTags& tags, int T, double fps,
                            const SubjectProxy& subject, std::uint64_t seed,
                            const SynthOptions& opts = {});

/// Camera-to-world rotation at `position` that puts `target` at image
/// point `uv` for the given intrinsics, with zero roll (yaw and pitch are
/// solved in closed form). Throws DegenerateLookAt when no roll-free
/// rotation reaches the offset.
Quat aim_with_offset(const Vec3& position, const Vec3& target, const Vec2& uv,
                     double fov, double aspect);

}  // namespace cinecam

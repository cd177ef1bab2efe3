#pragma once

#include <filesystem>

#include "cinecam/stage.hpp"

namespace cinecam {

struct PreviewOptions {
    int width = 320;
    int height = 180;
};

/// Writes one binary PPM (P6) per frame into out_dir, named
/// frame_%04d.ppm: ground grid, 2-segment subject stick figure, border
/// rectangle, anchor marker. Bytes are a pure function of the inputs.
void emit_preview(const Trajectory& traj, const SubjectProxy& subject, double aspect,
                  const std::filesystem::path& out_dir,
                  const PreviewOptions& opts = {});

}  // namespace cinecam

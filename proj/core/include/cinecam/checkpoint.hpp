#pragma once

#include <filesystem>

#include "cinecam/model.hpp"
#include "cinecam/tokenizer.hpp"

namespace cinecam {

/// A saved policy: weights plus the token spec they were trained with.
struct Checkpoint {
    Policy<float> model;
    TokenSpec spec;
};

/// Writes a single JSON header line followed by the raw little-endian
/// float32 parameter block. Loading restores the weights bit for bit.
void save_checkpoint(const std::filesystem::path& path, const Policy<float>& model,
                     const TokenSpec& spec);

/// Throws ParseError on version or shape mismatch, IoError if unreadable.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cinecam

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cinecam {

/// Reads a whole file into a string. Throws IoError if unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes atomically: content goes to a sibling temp file which is then
/// renamed over the target, so readers never observe a partial file.
/// Parent directories are created as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Splits a file into non-empty lines (JSONL convention; trailing \r stripped).
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Joins records with \n (plus trailing newline) and writes atomically.
void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<std::string>& lines);

}  // namespace cinecam

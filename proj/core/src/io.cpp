#include "cinecam/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cinecam/error.hpp"

namespace cinecam {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path dir = path.parent_path();
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.string().c_str());
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.string().c_str());
        throw IoError("rename failed for " + path.string() + ": " + ec.message());
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    const std::string blob = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < blob.size()) {
        std::size_t end = blob.find('\n', start);
        if (end == std::string::npos) end = blob.size();
        std::size_t len = end - start;
        if (len > 0 && blob[start + len - 1] == '\r') --len;
        if (len > 0) lines.emplace_back(blob.substr(start, len));
        start = end + 1;
    }
    return lines;
}

void write_lines_atomic(const fs::path& path, const std::vector<std::string>& lines) {
    std::string blob;
    std::size_t total = 0;
    for (const auto& l : lines) total += l.size() + 1;
    blob.reserve(total);
    for (const auto& l : lines) {
        blob += l;
        blob += '\n';
    }
    write_file_atomic(path, blob);
}

}  // namespace cinecam

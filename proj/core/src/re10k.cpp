#include "cinecam/re10k.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "cinecam/error.hpp"

namespace cinecam {

namespace {

void append_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += ' ';
    out += buf;
}

}  // namespace

std::string serialize_re10k(const Trajectory& traj, double image_aspect) {
    if (traj.frame != Frame::World)
        throw FrameMismatch("serialize_re10k: trajectory must be in world frame");
    traj.validate();
    if (!(image_aspect > 0.0)) throw DomainError("serialize_re10k: bad aspect");

    std::string out;
    out.reserve(traj.poses.size() * 320);
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
        const CameraPose& p = traj.poses[i];
        const Intrinsics k = intrinsics_from_fov(p.fov, image_aspect);
        const long long ts = std::llround(static_cast<double>(i) * 1e6 / traj.fps);
        char head[32];
        std::snprintf(head, sizeof(head), "%lld", ts);
        out += head;
        append_num(out, k.fx);
        append_num(out, k.fy);
        append_num(out, 0.5);
        append_num(out, 0.5);
        append_num(out, 0.0);
        append_num(out, 0.0);
        const Mat3 r_wc = p.rotation.toRotationMatrix().transpose();
        const Vec3 t_wc = -(r_wc * p.translation);
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col) append_num(out, r_wc(row, col));
            append_num(out, t_wc(row));
        }
        out += '\n';
    }
    return out;
}

Trajectory parse_re10k(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> fields;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                fields.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": not a number: " + tok);
            }
        }
        if (fields.size() != 19)
            throw ParseError("line " + std::to_string(line_no) + ": expected 19 fields, got " +
                             std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    if (rows.size() < 2) throw ParseError("expected at least 2 frames");

    const double dt_us = rows[1][0] - rows[0][0];
    if (!(dt_us > 0.0)) throw ParseError("line 2: timestamps not increasing");
    double fps = 1e6 / dt_us;
    if (std::abs(fps - std::round(fps)) < 1e-3) fps = std::round(fps);

    Trajectory out;
    out.fps = fps;
    out.frame = Frame::World;
    out.poses.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i];
        const double fy = f[2];
        if (!(fy > 0.0))
            throw ParseError("line " + std::to_string(i + 1) + ": fy must be positive");
        Mat3 r_wc;
        Vec3 t_wc;
        for (int row = 0; row < 3; ++row) {
            for (int col = 0; col < 3; ++col) r_wc(row, col) = f[7 + 4 * row + col];
            t_wc(row) = f[7 + 4 * row + 3];
        }
        CameraPose p;
        p.rotation = Quat(r_wc.transpose()).normalized();
        p.translation = -(r_wc.transpose() * t_wc);
        p.fov = fov_from_fy(fy);
        if (!(p.fov > 0.0 && p.fov < kPi))
            throw ParseError("line " + std::to_string(i + 1) + ": fov out of range");
        out.poses.push_back(p);
    }
    return out;
}

}  // namespace cinecam

#include "cinecam/preview.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "cinecam/io.hpp"

namespace cinecam {

namespace {

struct Canvas {
    int w, h;
    std::string pix;  // rgb triples

    Canvas(int width, int height) : w(width), h(height), pix(std::size_t(w) * h * 3, '\0') {
        for (std::size_t i = 0; i < pix.size(); i += 3) {
            pix[i] = 24;
            pix[i + 1] = 24;
            pix[i + 2] = 28;
        }
    }

    void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        const std::size_t i = (std::size_t(y) * w + x) * 3;
        pix[i] = char(r);
        pix[i + 1] = char(g);
        pix[i + 2] = char(b);
    }
};

struct FrameCtx {
    Mat3 r_wc;
    Vec3 cam;
    Intrinsics k;
};

bool to_uv(const FrameCtx& c, const Vec3& world, Vec2& uv) {
    const Projection p = project_point(c.r_wc * (world - c.cam), c.k);
    if (!p.visible) return false;
    uv = p.uv;
    return true;
}

void plot_uv(Canvas& cv, const Vec2& uv, unsigned char r, unsigned char g, unsigned char b) {
    if (uv.x() < 0.0 || uv.x() > 1.0 || uv.y() < 0.0 || uv.y() > 1.0) return;
    cv.set(int(std::lround(uv.x() * (cv.w - 1))), int(std::lround(uv.y() * (cv.h - 1))), r, g, b);
}

/// World-space segment drawn by dense sampling; cheap and clip-free.
void draw_segment(Canvas& cv, const FrameCtx& c, const Vec3& a, const Vec3& b,
                  unsigned char r, unsigned char g, unsigned char bl) {
    const int steps = 2 * std::max(cv.w, cv.h);
    for (int i = 0; i <= steps; ++i) {
        const double t = double(i) / steps;
        Vec2 uv;
        if (to_uv(c, a + t * (b - a), uv)) plot_uv(cv, uv, r, g, bl);
    }
}

}  // namespace

void emit_preview(const Trajectory& traj, const SubjectProxy& subject, double aspect,
                  const std::filesystem::path& out_dir, const PreviewOptions& opts) {
    const Trajectory world =
        traj.frame == Frame::World ? traj : to_world_frame(traj, subject);

    for (std::size_t fi = 0; fi < world.poses.size(); ++fi) {
        const CameraPose& pose = world.poses[fi];
        Canvas cv(opts.width, opts.height);
        FrameCtx ctx{pose.rotation.toRotationMatrix().transpose(), pose.translation,
                     intrinsics_from_fov(pose.fov, aspect)};

        // ground grid around the subject, 1 m pitch
        for (int g = -8; g <= 8; ++g) {
            const Vec3 base = subject.feet;
            draw_segment(cv, ctx, base + Vec3(g, 0, -8), base + Vec3(g, 0, 8), 60, 60, 70);
            draw_segment(cv, ctx, base + Vec3(-8, 0, g), base + Vec3(8, 0, g), 60, 60, 70);
        }
        // subject stick figure: feet->mid, mid->head
        draw_segment(cv, ctx, subject.feet, subject.mid(), 90, 200, 90);
        draw_segment(cv, ctx, subject.mid(), subject.head(), 200, 200, 90);

        // border-region rectangle
        const int bx0 = int(std::lround(kBorderFrac * (opts.width - 1)));
        const int bx1 = int(std::lround((1.0 - kBorderFrac) * (opts.width - 1)));
        const int by0 = int(std::lround(kBorderFrac * (opts.height - 1)));
        const int by1 = int(std::lround((1.0 - kBorderFrac) * (opts.height - 1)));
        for (int x = bx0; x <= bx1; ++x) {
            cv.set(x, by0, 120, 60, 60);
            cv.set(x, by1, 120, 60, 60);
        }
        for (int y = by0; y <= by1; ++y) {
            cv.set(bx0, y, 120, 60, 60);
            cv.set(bx1, y, 120, 60, 60);
        }

        // anchor marker
        const FrameFraming f = project_subject(pose, subject, aspect);
        if (f.anchor_uv.x() >= 0.0) {
            const int ax = int(std::lround(f.anchor_uv.x() * (opts.width - 1)));
            const int ay = int(std::lround(f.anchor_uv.y() * (opts.height - 1)));
            for (int dlt = -3; dlt <= 3; ++dlt) {
                cv.set(ax + dlt, ay, 255, 80, 80);
                cv.set(ax, ay + dlt, 255, 80, 80);
            }
        }

        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.ppm", fi);
        std::string blob = "P6\n" + std::to_string(opts.width) + " " +
                           std::to_string(opts.height) + "\n255\n" + cv.pix;
        write_file_atomic(out_dir / name, blob);
    }
}

}  // namespace cinecam

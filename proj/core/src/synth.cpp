#include "cinecam/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cinecam/error.hpp"
#include "cinecam/rng.hpp"

namespace cinecam {

namespace {

// Placement constants. Token ranges (|x|,|z| <= 12 m, y in [-2,6] m,
// per-frame deltas <= 0.25 m) bound how far and how fast synthesis may
// move, hence the per-band fov windows that keep solved distances small
// enough and the amplitude caps below.
constexpr double kAnchorMargin = 0.205;   // anchor kept in [0.205, 0.795]
constexpr double kMaxStartDistance = 10.9;
constexpr double kMaxSweepDistance = 11.7;
constexpr double kHighCenter = 18.0;      // degrees
constexpr double kLowCenter = -13.0;

struct FovBand {
    double lo, hi;  // degrees
};

FovBand band_fov(Scale s) {
    switch (s) {
        case Scale::extreme_long: return {112.0, 118.0};
        case Scale::long_shot: return {70.0, 90.0};
        case Scale::medium: return {55.0, 75.0};
        case Scale::medium_close_up: return {50.0, 70.0};
        case Scale::close: return {45.0, 65.0};
        case Scale::extreme_close: return {40.0, 60.0};
    }
    return {55.0, 75.0};
}

Vec3 ray_dir(double azimuth, double elevation) {
    return {std::sin(azimuth) * std::cos(elevation), std::sin(elevation),
            std::cos(azimuth) * std::cos(elevation)};
}

struct Placement {
    Vec3 mid;       // subject mid-height point (local frame)
    double h;       // subject height
    Vec2 uv;        // anchor target
    double aspect;
};

struct AimSolve {
    Quat q{1.0, 0.0, 0.0, 0.0};
    Vec2 cmd{0.5, 0.5};  // image point where the mid point projects
    double rho = 0.0;
    bool ok = false;
};

Vec2 clamp_cmd(Vec2 c) {
    c.x() = std::clamp(c.x(), 0.02, 0.98);
    c.y() = std::clamp(c.y(), 0.02, 0.98);
    return c;
}

/// Aim so the measured anchor (midpoint of the projected head and feet)
/// lands on pl.uv. aim_with_offset places the mid point, but perspective
/// projects head and feet asymmetrically, so at close range the anchor
/// sits far from the mid point's image and responds to the command with
/// gain > 1. Per-axis Newton steps on that response converge in a few
/// iterations; `warm` seeds the command from the previous frame.
AimSolve solve_aim(const Placement& pl, const Vec3& pos, double fov, const Vec2& warm) {
    AimSolve out;
    SubjectProxy local;
    local.height = pl.h;

    auto anchor_at = [&](const Vec2& c, AimSolve* keep) -> Vec2 {
        Quat q;
        try {
            q = aim_with_offset(pos, pl.mid, c, fov, pl.aspect);
        } catch (const Error&) {
            return {std::numeric_limits<double>::quiet_NaN(), 0.0};
        }
        const FrameFraming f = project_subject(CameraPose(pos, q, fov), local, pl.aspect);
        if (!(f.rho > 1e-12) || !f.anchor_uv.allFinite())
            return {std::numeric_limits<double>::quiet_NaN(), 0.0};
        if (keep != nullptr) {
            keep->q = q;
            keep->rho = f.rho;
        }
        return f.anchor_uv;
    };

    Vec2 cmd = clamp_cmd(warm);
    for (int it = 0; it < 24; ++it) {
        const Vec2 a = anchor_at(cmd, &out);
        if (!a.allFinite()) {
            cmd = clamp_cmd(0.5 * (cmd + Vec2(0.5, 0.5)));
            continue;
        }
        const Vec2 err = pl.uv - a;
        if (std::abs(err.x()) < 1e-8 && std::abs(err.y()) < 1e-8) {
            out.cmd = cmd;
            out.ok = true;
            return out;
        }
        const double hx = cmd.x() > 0.9 ? -1e-4 : 1e-4;
        const double hy = cmd.y() > 0.9 ? -1e-4 : 1e-4;
        const Vec2 ax = anchor_at(cmd + Vec2(hx, 0.0), nullptr);
        const Vec2 ay = anchor_at(cmd + Vec2(0.0, hy), nullptr);
        double gx = ax.allFinite() ? (ax.x() - a.x()) / hx : 1.0;
        double gy = ay.allFinite() ? (ay.y() - a.y()) / hy : 1.0;
        if (std::abs(gx) < 1e-3) gx = 1.0;
        if (std::abs(gy) < 1e-3) gy = 1.0;
        const double dx = std::clamp(err.x() / gx, -0.12, 0.12);
        const double dy = std::clamp(err.y() / gy, -0.12, 0.12);
        cmd = clamp_cmd(cmd + Vec2(dx, dy));
    }
    out.ok = false;
    return out;
}

/// Measured rho at `pos` under the anchor-pinning aim, or 0 when no aim
/// places the anchor on target.
double rho_at(const Placement& pl, const Vec3& pos, double fov, Vec2& warm) {
    const AimSolve s = solve_aim(pl, pos, fov, warm);
    if (!s.ok) return 0.0;
    warm = s.cmd;
    return s.rho;
}

/// Distance along `dir` from the mid point whose measured rho equals
/// rho_star. rho is ~c/d, so fixed-point scaling converges fast. NaN when
/// the aim solve fails along the way.
double solve_distance(const Placement& pl, const Vec3& dir, double fov, double rho_star,
                      Vec2& warm) {
    double d = pl.h / (2.0 * rho_star * std::tan(fov / 2.0));
    for (int it = 0; it < 24; ++it) {
        const double rho = rho_at(pl, pl.mid + d * dir, fov, warm);
        if (!(rho > 1e-9)) return std::numeric_limits<double>::quiet_NaN();
        const double next = d * rho / rho_star;
        if (std::abs(next - d) < 1e-13 * d) return next;
        d = next;
    }
    return d;
}

/// FoV that restores rho_star at a given position (dolly-zoom step). NaN
/// when the aim solve fails.
double solve_fov(const Placement& pl, const Vec3& pos, double fov_init, double rho_star,
                 Vec2& warm) {
    double t = std::tan(fov_init / 2.0);
    for (int it = 0; it < 24; ++it) {
        const double fov = 2.0 * std::atan(t);
        const double rho = rho_at(pl, pos, fov, warm);
        if (!(rho > 1e-9)) return std::numeric_limits<double>::quiet_NaN();
        const double next = t * rho / rho_star;
        if (std::abs(next - t) < 1e-13 * t) return 2.0 * std::atan(next);
        t = next;
    }
    return 2.0 * std::atan(t);
}

bool anchor_ok(const Placement& pl, const Vec3& pos, const Quat& q, double fov) {
    SubjectProxy local;
    local.height = pl.h;
    const FrameFraming f = project_subject(CameraPose(pos, q, fov), local, pl.aspect);
    return f.visible && f.anchor_uv.x() >= kAnchorMargin &&
           f.anchor_uv.x() <= 1.0 - kAnchorMargin && f.anchor_uv.y() >= kAnchorMargin &&
           f.anchor_uv.y() <= 1.0 - kAnchorMargin;
}

/// Largest sweep half-angle (radians, up to `cap`) for which the rotated
/// base aim keeps the anchor inside the safe slab at both extremes.
double sweep_half_angle(const Placement& pl, const Vec3& pos, const Quat& base, double fov,
                        bool about_world_up, double cap) {
    auto ok = [&](double ang) {
        for (double sign : {-1.0, 1.0}) {
            const Quat q =
                about_world_up
                    ? Quat(quat_from_axis_angle(Vec3::UnitY(), sign * ang)) * base
                    : base * quat_from_axis_angle(Vec3::UnitX(), sign * ang);
            if (!anchor_ok(pl, pos, q, fov)) return false;
        }
        return true;
    };
    if (ok(cap)) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 30; ++it) {
        const double m = 0.5 * (lo + hi);
        (ok(m) ? lo : hi) = m;
    }
    return 0.95 * lo;
}

double elevation_center(Angle a) {
    switch (a) {
        case Angle::high: return rad(kHighCenter);
        case Angle::eye_level: return 0.0;
        case Angle::low: return rad(kLowCenter);
    }
    return 0.0;
}

/// Point of the screen cell nearest the frame center, kept strictly inside
/// the cell. Off-center anchors inflate the rho-per-meter relation, so the
/// placement relaxes toward this point when the distance solve leaves the
/// tokenizer's coordinate box.
Vec2 cell_inner_target(ScreenPos s) {
    auto inner = [](int c) {
        if (c == 0) return 1.0 / 3.0 - 0.015;
        if (c == 1) return 0.5;
        return 2.0 / 3.0 + 0.015;
    };
    const int idx = static_cast<int>(s);
    return {inner(idx % 3), inner(idx / 3)};
}

double elevation_jitter_limit(Angle a) { return a == Angle::eye_level ? rad(5.0) : rad(2.5); }

struct Attempt {
    Trajectory traj;
    bool ok = false;
};

Attempt attempt_synth(const ShotTags& tags, int T, double fps, double height, Rng& rng,
                      const SynthOptions& opts) {
    Attempt out;
    const double j = opts.jitter;

    Placement pl;
    pl.h = height;
    pl.mid = Vec3(0.0, 0.5 * height, 0.0);
    pl.aspect = opts.aspect;
    const Vec2 cell = screen_cell_target(tags.screen);
    pl.uv = cell + j * Vec2(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02));

    double rho_star =
        scale_band_target(tags.scale) +
        j * rng.uniform(-0.3, 0.3) * scale_band_half_width(tags.scale);
    const double az = direction_sector_center(tags.direction) + j * rng.uniform(rad(-10.0), rad(10.0));
    const double el = elevation_center(tags.angle) +
                      j * rng.uniform(-1.0, 1.0) * elevation_jitter_limit(tags.angle);

    const FovBand fb = band_fov(tags.scale);
    double fov = rad(0.5 * (fb.lo + fb.hi) + j * rng.uniform(-0.5, 0.5) * (fb.hi - fb.lo));
    if (tags.motion == Motion::dolly_zoom_in || tags.motion == Motion::dolly_zoom_out) {
        // leave headroom for the wide end of the fov sweep; the off-axis
        // anchor response widens it beyond the plain distance ratio
        fov = 2.0 * std::atan(std::tan(fov / 2.0) / (std::pow(1.35, 0.25) * 1.12));
    }

    const Vec3 dir = ray_dir(az, el);
    Vec2 warm = pl.uv;
    double d0 = solve_distance(pl, dir, fov, rho_star, warm);
    const double rho_lo = scale_band_target(tags.scale) - 0.9 * scale_band_half_width(tags.scale);
    const double rho_hi = scale_band_target(tags.scale) + 0.9 * scale_band_half_width(tags.scale);
    for (int relax = 0; relax < 4 && !(d0 >= 0.2 && d0 <= kMaxStartDistance); ++relax) {
        if (d0 > kMaxStartDistance || std::isnan(d0)) {
            pl.uv += 0.45 * (cell_inner_target(tags.screen) - pl.uv);
            rho_star = std::min(rho_hi, rho_star * 1.25);
        } else {
            rho_star = std::max(rho_lo, rho_star * 0.8);
        }
        warm = pl.uv;
        d0 = solve_distance(pl, dir, fov, rho_star, warm);
    }
    if (!(d0 >= 0.2 && d0 <= kMaxStartDistance)) return out;

    Trajectory traj;
    traj.fps = fps;
    traj.frame = Frame::SubjectLocal;
    traj.poses.reserve(static_cast<std::size_t>(T));

    bool aim_ok = true;
    auto aim = [&](const Vec3& p, double f) -> Quat {
        const AimSolve s = solve_aim(pl, p, f, warm);
        if (!s.ok) {
            aim_ok = false;
            return Quat(1.0, 0.0, 0.0, 0.0);
        }
        warm = s.cmd;
        return s.q;
    };
    auto param = [&](int t) { return static_cast<double>(t) / static_cast<double>(T - 1); };

    const Vec3 p0 = pl.mid + d0 * dir;
    const Quat q0 = aim(p0, fov);
    if (!aim_ok) return out;

    switch (tags.motion) {
        case Motion::static_shot: {
            for (int t = 0; t < T; ++t) traj.poses.emplace_back(p0, q0, fov);
            break;
        }
        case Motion::push_in:
        case Motion::pull_out: {
            // travel along the look axis so the displacement/look cosine is
            // decisive even at off-center framings
            const double s = 1.15;
            const double span = 2.0 * d0 * (s - 1.0) / (s + 1.0);
            const Vec3 fwd = q0 * Vec3(0.0, 0.0, -1.0);
            const double sgn = tags.motion == Motion::push_in ? 1.0 : -1.0;
            for (int t = 0; t < T; ++t) {
                const Vec3 p = p0 + sgn * span * (param(t) - 0.5) * fwd;
                traj.poses.emplace_back(p, aim(p, fov), fov);
            }
            break;
        }
        case Motion::dolly_zoom_in:
        case Motion::dolly_zoom_out: {
            for (int shrink = 0;; ++shrink) {
                // distance ratio sized so the net travel clears the
                // classifier's translation threshold (eps * T) with margin,
                // even close in
                const double need = 0.012 * static_cast<double>(T) / d0;
                const double xr = 0.5 * (need + std::sqrt(need * need + 4.0));
                double rr = std::max(1.35, xr * xr * xr * xr);
                rr = std::min(rr, (kMaxSweepDistance / d0) * (kMaxSweepDistance / d0));
                const double xf = std::pow(rr, 0.25);
                if (d0 * (xf - 1.0 / xf) < 0.011 * static_cast<double>(T)) return out;
                double f = fov;
                bool wide_ok = true;
                traj.poses.clear();
                warm = pl.uv;
                for (int t = 0; t < T; ++t) {
                    double c = param(t) - 0.5;
                    if (tags.motion == Motion::dolly_zoom_in) c = -c;
                    const double g = std::exp(0.5 * std::log(rr) * c);
                    const Vec3 p = pl.mid + d0 * g * dir;
                    f = solve_fov(pl, p, f, rho_star, warm);
                    if (!(f > rad(9.0) && f < rad(121.0))) {
                        wide_ok = false;
                        break;
                    }
                    traj.poses.emplace_back(p, aim(p, f), f);
                }
                if (wide_ok) break;
                if (shrink == 3 || !aim_ok) return out;
                // the anchor response runs away at the wide end of the
                // sweep; narrow the base fov, which pushes the camera back,
                // and rebuild
                fov = 2.0 * std::atan(0.82 * std::tan(0.5 * fov));
                warm = pl.uv;
                d0 = solve_distance(pl, dir, fov, rho_star, warm);
                for (int relax = 0; relax < 4 && !(d0 >= 0.2 && d0 <= kMaxStartDistance);
                     ++relax) {
                    rho_star = std::min(rho_hi, rho_star * 1.25);
                    warm = pl.uv;
                    d0 = solve_distance(pl, dir, fov, rho_star, warm);
                }
                if (!(d0 >= 0.2 && d0 <= kMaxStartDistance)) return out;
            }
            break;
        }
        case Motion::zoom_in:
        case Motion::zoom_out: {
            const double off = std::max(std::abs(pl.uv.x() - 0.5), std::abs(pl.uv.y() - 0.5));
            double rz = off < 0.02 ? 1.5 : std::min(1.45, 0.98 * std::pow(0.29 / off, 2.0));
            const double tan_cap = std::tan(rad(59.5));
            rz = std::min(rz, std::pow(tan_cap / std::tan(fov / 2.0), 2.0));
            rz = std::max(rz, 1.05);
            for (int t = 0; t < T; ++t) {
                double c = param(t) - 0.5;
                if (tags.motion == Motion::zoom_in) c = -c;  // narrowing over time
                const double ft = 2.0 * std::atan(std::tan(fov / 2.0) *
                                                  std::exp(0.5 * std::log(rz) * c));
                traj.poses.emplace_back(p0, q0, ft);
            }
            break;
        }
        case Motion::pan:
        case Motion::tilt: {
            const bool is_pan = tags.motion == Motion::pan;
            const double half =
                sweep_half_angle(pl, p0, q0, fov, is_pan, rad(10.0));
            if (half < rad(1.8)) return out;
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            for (int t = 0; t < T; ++t) {
                const double a = sign * half * (2.0 * param(t) - 1.0);
                const Quat q = is_pan
                                   ? Quat(quat_from_axis_angle(Vec3::UnitY(), a)) * q0
                                   : q0 * quat_from_axis_angle(Vec3::UnitX(), a);
                traj.poses.emplace_back(p0, q.normalized(), fov);
            }
            break;
        }
        case Motion::truck_left:
        case Motion::truck_right: {
            Vec3 right = q0.toRotationMatrix().col(0);
            right.y() = 0.0;
            right.normalize();
            const double span = std::min({6.5, std::max(0.35, 0.5 * d0), 0.8 * d0});
            const Vec3 axis = (tags.motion == Motion::truck_right ? 1.0 : -1.0) * right;
            for (int t = 0; t < T; ++t) {
                const Vec3 p = p0 + span * (param(t) - 0.5) * axis;
                traj.poses.emplace_back(p, aim(p, fov), fov);
            }
            break;
        }
        case Motion::boom_up:
        case Motion::boom_down: {
            const double dh = std::hypot(p0.x() - pl.mid.x(), p0.z() - pl.mid.z());
            double half = rad(4.0) * (1.0 + j * rng.uniform(-0.25, 0.25));
            // keep the top of the sweep under the tokenizer's y ceiling
            const double e_hi = std::atan2(5.9 - pl.mid.y(), dh);
            half = std::min(half, std::max(rad(1.0), e_hi - el));
            const double sgn = tags.motion == Motion::boom_up ? 1.0 : -1.0;
            for (int t = 0; t < T; ++t) {
                const double e = el + sgn * half * (2.0 * param(t) - 1.0);
                Vec3 p = p0;
                p.y() = pl.mid.y() + dh * std::tan(e);
                traj.poses.emplace_back(p, aim(p, fov), fov);
            }
            break;
        }
        case Motion::rotate: {
            const double sweep = rad(21.0 + j * rng.uniform(-7.0, 7.0));
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            for (int t = 0; t < T; ++t) {
                const double a = az + sign * sweep * (param(t) - 0.5);
                const Vec3 p = pl.mid + d0 * ray_dir(a, el);
                traj.poses.emplace_back(p, aim(p, fov), fov);
            }
            break;
        }
    }
    if (!aim_ok) return out;

    out.traj = std::move(traj);
    out.ok = true;
    return out;
}

}  // namespace

Quat aim_with_offset(const Vec3& position, const Vec3& target, const Vec2& uv, double fov,
                     double aspect) {
    const Intrinsics k = intrinsics_from_fov(fov, aspect);
    Vec3 v((uv.x() - 0.5) / k.fx, (0.5 - uv.y()) / k.fy, -1.0);
    v.normalize();
    Vec3 w = target - position;
    const double wn = w.norm();
    if (wn < 1e-12) throw DegenerateLookAt("aim target coincides with the camera");
    w /= wn;

    // Solve R = Ry(yaw) Rx(pitch) with R v = w. The y row gives
    // cos(pitch) v.y - sin(pitch) v.z = w.y, an amplitude-phase equation.
    const double amp = std::hypot(v.y(), v.z());
    if (amp < std::abs(w.y()))
        throw DegenerateLookAt("image offset unreachable without roll");
    const double phase = std::atan2(v.z(), v.y());
    const double acos_term = std::acos(std::clamp(w.y() / amp, -1.0, 1.0));
    auto wrap = [](double a) {
        while (a > kPi) a -= 2.0 * kPi;
        while (a < -kPi) a += 2.0 * kPi;
        return a;
    };
    const double b1 = wrap(acos_term - phase);
    const double b2 = wrap(-acos_term - phase);
    const double pitch = std::abs(b1) <= std::abs(b2) ? b1 : b2;

    const double sp = std::sin(pitch), cp = std::cos(pitch);
    const Vec3 m(v.x(), cp * v.y() - sp * v.z(), sp * v.y() + cp * v.z());
    const double yaw = wrap(std::atan2(w.x(), w.z()) - std::atan2(m.x(), m.z()));
    return quat_from_euler({yaw, pitch, 0.0});
}

Trajectory synth_trajectory(const ShotTags& tags, int T, double fps,
                            const SubjectProxy& subject, std::uint64_t seed,
                            const SynthOptions& opts) {
    if (T < 2) throw DomainError("synth_trajectory: T must be >= 2");
    SubjectProxy local;
    local.height = subject.height;

    TokenSpec codec = opts.codec != nullptr ? *opts.codec : default_token_spec();
    codec.fps = fps;

    Rng rng(seed, 0x5f2);
    for (int attempt = 0; attempt < 48; ++attempt) {
        Attempt a;
        try {
            a = attempt_synth(tags, T, fps, subject.height, rng, opts);
        } catch (const Error&) {
            continue;
        }
        if (!a.ok) continue;
        try {
            if (classify_shot_tags(a.traj, local, opts.aspect) != tags) continue;
            if (framing_report(a.traj, local, opts.aspect).miss_rate != 0.0) continue;
            // quantization nudges frame 0 by up to half a bin; require the
            // decoded sequence to carry the same tags so the pair of caption
            // and tokens the model trains on never disagrees
            const TokenizedTrajectory tok =
                tokenize(a.traj, PartialShotTags::from(tags), codec);
            if (tok.clamp_count != 0) continue;
            const Trajectory decoded = detokenize(tok.tokens, codec);
            if (classify_shot_tags(decoded, local, opts.aspect) != tags) continue;
            if (framing_report(decoded, local, opts.aspect).miss_rate != 0.0) continue;
        } catch (const Error&) {
            continue;
        }
        return a.traj;
    }
    throw InfeasibleTags(std::string("no classifiable placement for tags (") +
                         std::string(to_string(tags.motion)) + ", " +
                         std::string(to_string(tags.scale)) + ", " +
                         std::string(to_string(tags.direction)) + ", " +
                         std::string(to_string(tags.angle)) + ", " +
                         std::string(to_string(tags.screen)) + ")");
}

}  // namespace cinecam

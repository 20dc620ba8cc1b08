#pragma once

// Synthetic PLAX-like clips: two horizontal wall bands (septum and
// posterior wall) around a darker cavity, moving sinusoidally. Wall edge
// rows are analytic, so landmark ground truth is exact.

#include "lvamm/amm.hpp"
#include "lvamm/error.hpp"
#include "lvamm/image.hpp"
#include "lvamm/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace lvamm {

struct PhantomSpec {
    std::size_t height = 256;
    std::size_t width = 256;
    std::size_t frame_count = 30;
    double frame_interval_s = 1.0 / 30.0;
    // IVS top, IVS bottom, LVPW top, LVPW bottom
    std::array<double, 4> baseline_rows = {60.0, 90.0, 180.0, 210.0};
    std::array<double, 4> amplitudes_px = {3.0, 5.0, -8.0, -5.0};
    double period_s = 1.0;
    double wall_intensity = 0.8;
    double cavity_intensity = 0.1;
    double noise_sd = 0.02;
    std::uint64_t seed = 0;
};

inline void validate_phantom(const PhantomSpec& spec) {
    if (spec.width == 0 || spec.height == 0 || spec.frame_count == 0) {
        fail(ErrorKind::InvalidArgument, "phantom needs a non-empty frame size and at least one frame");
    }
    if (!(spec.period_s > 0.0) || !(spec.frame_interval_s > 0.0)) {
        fail(ErrorKind::InvalidArgument, "phantom period and frame interval must be positive");
    }
    if (spec.noise_sd < 0.0) {
        fail(ErrorKind::InvalidArgument, "noise_sd must be non-negative");
    }
    for (std::size_t k = 0; k + 1 < 4; ++k) {
        const double gap = spec.baseline_rows[k + 1] - spec.baseline_rows[k];
        // rows stay ordered for every t iff each gap exceeds the relative swing
        if (!(gap > std::abs(spec.amplitudes_px[k + 1] - spec.amplitudes_px[k]))) {
            fail(ErrorKind::OrderingViolation, "wall rows " + std::to_string(k) + " and " + std::to_string(k + 1) +
                                                   " cross during the cycle");
        }
    }
}

inline std::array<double, 4> wall_rows(const PhantomSpec& spec, double t) {
    validate_phantom(spec);
    const double phase = std::sin(2.0 * std::numbers::pi * t / spec.period_s);
    std::array<double, 4> rows{};
    for (std::size_t k = 0; k < 4; ++k) {
        rows[k] = spec.baseline_rows[k] + spec.amplitudes_px[k] * phase;
    }
    return rows;
}

inline double frame_time(const PhantomSpec& spec, std::size_t frame_index) {
    return static_cast<double>(frame_index) * spec.frame_interval_s;
}

namespace detail {

/// Length of the overlap of [a0, a1] and [b0, b1].
inline double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

} // namespace detail

/// Noise-free intensity of pixel row `y`: each pixel covers [y - 0.5, y + 0.5]
/// and mixes band intensities by covered fraction.
inline double phantom_row_intensity(const PhantomSpec& spec, const std::array<double, 4>& rows, double y) {
    const double lo = y - 0.5;
    const double hi = y + 0.5;
    const double wall = detail::overlap(lo, hi, rows[0], rows[1]) + detail::overlap(lo, hi, rows[2], rows[3]);
    const double cavity = detail::overlap(lo, hi, rows[1], rows[2]);
    return wall * spec.wall_intensity + cavity * spec.cavity_intensity;
}

/// Renders frame `frame_index` at t = frame_index * frame_interval_s.
/// Noise is drawn from a generator keyed on (seed, frame_index).
inline Image render_frame(const PhantomSpec& spec, std::size_t frame_index) {
    const auto rows = wall_rows(spec, frame_time(spec, frame_index));
    Image frame(spec.width, spec.height);
    std::vector<double> profile(spec.height);
    for (std::size_t y = 0; y < spec.height; ++y) {
        profile[y] = phantom_row_intensity(spec, rows, static_cast<double>(y));
    }
    if (spec.noise_sd == 0.0) {
        for (std::size_t y = 0; y < spec.height; ++y) {
            std::fill(frame.row(y).begin(), frame.row(y).end(), profile[y]);
        }
        return frame;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(frame_index), static_cast<std::uint32_t>(frame_index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (double& px : frame.row(y)) {
            px = std::clamp(profile[y] + noise(rng), 0.0, 1.0);
        }
    }
    return frame;
}

inline std::vector<Image> render_video(const PhantomSpec& spec) {
    validate_phantom(spec);
    std::vector<Image> video;
    video.reserve(spec.frame_count);
    for (std::size_t i = 0; i < spec.frame_count; ++i) {
        video.push_back(render_frame(spec, i));
    }
    return video;
}

/// Intersections of the scanline with the four wall-edge rows at time t,
/// ordered from p_start to p_end.
inline LandmarkSet ground_truth_landmarks(const PhantomSpec& spec, double t, const Scanline& sl) {
    validate_scanline(sl);
    const auto rows = wall_rows(spec, t);
    const double dy = sl.p_end.y - sl.p_start.y;
    std::array<std::pair<double, Point2>, 4> hits;
    for (std::size_t k = 0; k < 4; ++k) {
        if (dy == 0.0) {
            fail(ErrorKind::NoIntersection, "horizontal scanline cannot cross wall rows");
        }
        const double param = (rows[k] - sl.p_start.y) / dy;
        if (param < 0.0 || param > 1.0) {
            fail(ErrorKind::NoIntersection, "scanline does not reach wall row " + std::to_string(rows[k]));
        }
        hits[k] = {param, Point2{sl.p_start.x + param * (sl.p_end.x - sl.p_start.x), rows[k]}};
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    LandmarkSet out;
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = hits[k].second;
    }
    return out;
}

inline double phantom_lvid_px(const PhantomSpec& spec, std::size_t frame_index) {
    const auto rows = wall_rows(spec, frame_time(spec, frame_index));
    return rows[2] - rows[1];
}

/// Frame with the widest cavity (end-diastole); earliest frame on ties.
inline std::size_t phantom_ed_frame(const PhantomSpec& spec) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < spec.frame_count; ++i) {
        if (phantom_lvid_px(spec, i) > phantom_lvid_px(spec, best)) {
            best = i;
        }
    }
    return best;
}

/// Frame with the narrowest cavity (end-systole); earliest frame on ties.
inline std::size_t phantom_es_frame(const PhantomSpec& spec) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < spec.frame_count; ++i) {
        if (phantom_lvid_px(spec, i) < phantom_lvid_px(spec, best)) {
            best = i;
        }
    }
    return best;
}

/// Scanline from near the top to near the bottom of the frame, tilted by
/// `angle_deg` from vertical (positive leans right going down), placed at a
/// random x that keeps both endpoints 10 px inside the frame.
inline Scanline random_phantom_scanline(std::mt19937_64& rng, const PhantomSpec& spec, double angle_deg) {
    constexpr double kMargin = 10.0;
    const double top = kMargin;
    const double bottom = static_cast<double>(spec.height) - kMargin;
    const double dx = (bottom - top) * std::tan(angle_deg * std::numbers::pi / 180.0);
    const double lo = kMargin + std::max(0.0, -dx);
    const double hi = static_cast<double>(spec.width) - 1.0 - kMargin - std::max(0.0, dx);
    if (hi < lo) {
        fail(ErrorKind::InvalidArgument, "frame too narrow for a scanline tilted by " + std::to_string(angle_deg));
    }
    std::uniform_real_distribution<double> x(lo, hi);
    const double x0 = x(rng);
    return {{x0, top}, {x0 + dx, bottom}};
}

/// Contracting phantom with randomised anatomy on a 256-row frame: walls
/// 22-30 px thick, cavity 70-100 px, septum and posterior wall moving
/// towards each other in systole.
inline PhantomSpec random_phantom_spec(std::mt19937_64& rng, PhantomSpec base = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto pick = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    const double ivs_top = pick(35.0, 60.0);
    const double ivs = pick(22.0, 30.0);
    const double lvid = pick(70.0, 100.0);
    const double lvpw = pick(22.0, 30.0);
    base.baseline_rows = {ivs_top, ivs_top + ivs, ivs_top + ivs + lvid, ivs_top + ivs + lvid + lvpw};
    const double septal = pick(2.0, 5.0);
    const double posterior = pick(3.0, 6.0);
    base.amplitudes_px = {septal, septal + pick(0.5, 3.0), -(posterior + pick(0.5, 3.0)), -posterior};
    base.wall_intensity = pick(0.6, 0.9);
    base.cavity_intensity = pick(0.05, 0.2);
    base.seed = rng();
    return base;
}

} // namespace lvamm

#pragma once

#include "lvamm/amm.hpp"
#include "lvamm/error.hpp"
#include "lvamm/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace lvamm {

/// Four landmarks ordered along the scanline: IVS top, IVS bottom / LVID
/// top, LVID bottom / LVPW top, LVPW bottom.
using LandmarkSet = std::array<Point2, 4>;

inline constexpr std::size_t kStructureCount = 3;
inline constexpr std::array<const char*, kStructureCount> kStructureNames = {"ivs", "lvid", "lvpw"};

struct SegmentLengths {
    double ivs_cm = 0.0;
    double lvid_cm = 0.0;
    double lvpw_cm = 0.0;

    std::array<double, kStructureCount> values() const { return {ivs_cm, lvid_cm, lvpw_cm}; }

    friend bool operator==(const SegmentLengths&, const SegmentLengths&) = default;
};

inline SegmentLengths segment_lengths(std::span<const Point2> lms, double spacing_cm_per_px) {
    if (lms.size() != 4) {
        fail(ErrorKind::CountMismatch, "segment lengths need 4 landmarks, got " + std::to_string(lms.size()));
    }
    if (!(spacing_cm_per_px > 0.0)) {
        fail(ErrorKind::InvalidArgument, "spacing must be positive");
    }
    const Point2 axis = lms[3] - lms[0];
    const double axis_sq = dot(axis, axis);
    if (axis_sq == 0.0) {
        if (!std::all_of(lms.begin(), lms.end(), [&](Point2 p) { return p == lms[0]; })) {
            fail(ErrorKind::UnorderedLandmarks, "outer landmarks coincide while inner ones do not");
        }
    } else {
        double previous = 0.0;
        for (std::size_t i = 1; i < 4; ++i) {
            const double t = dot(lms[i] - lms[0], axis) / axis_sq;
            if (t < previous - 1e-12) {
                fail(ErrorKind::UnorderedLandmarks, "landmark " + std::to_string(i + 1) + " lies before landmark " +
                                                        std::to_string(i) + " along the scanline");
            }
            previous = std::max(previous, t);
        }
    }
    return {distance(lms[0], lms[1]) * spacing_cm_per_px, distance(lms[1], lms[2]) * spacing_cm_per_px,
            distance(lms[2], lms[3]) * spacing_cm_per_px};
}

struct MaeResult {
    std::array<double, kStructureCount> per_structure{};
    double average = 0.0;
};

/// Absolute length error per structure and its mean over the three segments.
inline MaeResult mae(const SegmentLengths& pred, const SegmentLengths& gt) {
    MaeResult out;
    const auto p = pred.values();
    const auto g = gt.values();
    for (std::size_t k = 0; k < kStructureCount; ++k) {
        out.per_structure[k] = std::abs(p[k] - g[k]);
    }
    out.average = (out.per_structure[0] + out.per_structure[1] + out.per_structure[2]) / 3.0;
    return out;
}

/// Relative length error per structure, as fractions.
inline std::array<double, kStructureCount> mape(const SegmentLengths& pred, const SegmentLengths& gt) {
    std::array<double, kStructureCount> out{};
    const auto p = pred.values();
    const auto g = gt.values();
    for (std::size_t k = 0; k < kStructureCount; ++k) {
        if (!(g[k] > 0.0)) {
            fail(ErrorKind::ZeroGroundTruthLength, std::string(kStructureNames[k]) + " ground truth length is zero");
        }
        out[k] = std::abs(p[k] - g[k]) / g[k];
    }
    return out;
}

/// Mean Euclidean landmark displacement, in cm.
inline double coordinate_error(std::span<const Point2> pred, std::span<const Point2> gt, double spacing_cm_per_px) {
    if (pred.size() != gt.size() || pred.empty()) {
        fail(ErrorKind::CountMismatch, "coordinate error needs equal, non-empty landmark sets (" +
                                           std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) + ")");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        total += distance(pred[i], gt[i]);
    }
    return total / static_cast<double>(pred.size()) * spacing_cm_per_px;
}

struct SampleEval {
    std::array<double, kStructureCount> mae_per_structure{};
    std::array<double, kStructureCount> mape_per_structure{};
    double ce_cm = 0.0;
    double mae_avg_cm = 0.0;
};

inline SampleEval evaluate_sample(std::span<const Point2> pred, std::span<const Point2> gt, double spacing_cm_per_px) {
    const SegmentLengths pred_len = segment_lengths(pred, spacing_cm_per_px);
    const SegmentLengths gt_len = segment_lengths(gt, spacing_cm_per_px);
    const MaeResult m = mae(pred_len, gt_len);
    SampleEval out;
    out.mae_per_structure = m.per_structure;
    out.mae_avg_cm = m.average;
    out.mape_per_structure = mape(pred_len, gt_len);
    out.ce_cm = coordinate_error(pred, gt, spacing_cm_per_px);
    return out;
}

/// Orthogonal projection onto the scanline's line, clamped to the segment.
inline Point2 project_to_scanline(Point2 p, const Scanline& sl) {
    validate_scanline(sl);
    const Point2 d = sl.direction();
    const double t = std::clamp(dot(p - sl.p_start, d) / dot(d, d), 0.0, 1.0);
    return sl.p_start + t * d;
}

inline std::vector<Point2> project_to_scanline(std::span<const Point2> pred, const Scanline& sl) {
    std::vector<Point2> out;
    out.reserve(pred.size());
    for (Point2 p : pred) {
        out.push_back(project_to_scanline(p, sl));
    }
    return out;
}

/// Distance from `p` to the infinite line through the scanline.
inline double perpendicular_distance(Point2 p, const Scanline& sl) {
    const Point2 d = sl.direction();
    return std::abs(cross(d, p - sl.p_start)) / norm(d);
}

struct SdrCurve {
    std::vector<double> thresholds_mm;
    std::vector<double> rates;
};

/// Fraction of samples whose average error is at most each threshold.
inline SdrCurve sdr_curve(std::span<const double> per_sample_mae_avg_mm, std::span<const double> thresholds_mm) {
    if (per_sample_mae_avg_mm.empty()) {
        fail(ErrorKind::EmptySampleSet, "SDR needs at least one sample");
    }
    if (!std::is_sorted(thresholds_mm.begin(), thresholds_mm.end())) {
        fail(ErrorKind::InvalidArgument, "SDR thresholds must be ascending");
    }
    std::vector<double> sorted(per_sample_mae_avg_mm.begin(), per_sample_mae_avg_mm.end());
    std::sort(sorted.begin(), sorted.end());
    SdrCurve curve;
    curve.thresholds_mm.assign(thresholds_mm.begin(), thresholds_mm.end());
    for (double e : thresholds_mm) {
        const auto hits = std::upper_bound(sorted.begin(), sorted.end(), e) - sorted.begin();
        curve.rates.push_back(static_cast<double>(hits) / static_cast<double>(sorted.size()));
    }
    return curve;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) {
        fail(ErrorKind::EmptySampleSet, "mean of an empty list");
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double sample_sd(std::span<const double> xs) {
    const double mu = mean(xs);
    if (xs.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mu) * (x - mu);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        fail(ErrorKind::CountMismatch, "Pearson correlation needs two equal lists of at least 2 values");
    }
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        fail(ErrorKind::ZeroVariance, "Pearson correlation of a constant list");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline constexpr double kBlandAltmanZ = 1.96;

struct BlandAltman {
    double bias = 0.0;
    double sd = 0.0;
    double loa_low = 0.0;
    double loa_high = 0.0;
};

inline BlandAltman bland_altman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        fail(ErrorKind::CountMismatch, "Bland-Altman needs paired lists of at least 2 values (" +
                                           std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
    }
    BlandAltman out;
    out.bias = mean(diff);
    out.sd = sample_sd(diff);
    out.loa_low = out.bias - kBlandAltmanZ * out.sd;
    out.loa_high = out.bias + kBlandAltmanZ * out.sd;
    return out;
}

} // namespace lvamm

#pragma once

// Reference computations used only by tests. Each one is coded from the
// textbook definition and avoids the library's implementation path.

#include "lvamm/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

/// Bilinear interpolation as a tent-kernel sum over every pixel within one
/// unit of p.
inline double tent_bilinear(const lvamm::Image& img, lvamm::Point2 p) {
    long double total = 0.0L;
    const long x_lo = static_cast<long>(std::floor(p.x)) - 1;
    const long y_lo = static_cast<long>(std::floor(p.y)) - 1;
    for (long j = y_lo; j <= y_lo + 3; ++j) {
        for (long i = x_lo; i <= x_lo + 3; ++i) {
            if (i < 0 || j < 0 || i >= static_cast<long>(img.width()) || j >= static_cast<long>(img.height())) {
                continue;
            }
            const long double wx = std::max(0.0L, 1.0L - std::fabs(static_cast<long double>(p.x) - i));
            const long double wy = std::max(0.0L, 1.0L - std::fabs(static_cast<long double>(p.y) - j));
            total += wx * wy * img.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return static_cast<double>(total);
}

/// Index of the value nearest to `target`, ties to the lower index, by
/// sorting (distance, index) pairs.
inline std::size_t nearest_index(const std::vector<double>& values, double target) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ranked.emplace_back(std::fabs(values[i] - target), i);
    }
    std::sort(ranked.begin(), ranked.end());
    return ranked.front().second;
}

inline long double mean(const std::vector<double>& xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    return s / xs.size();
}

/// Pearson r from raw sums: (n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2)).
inline double pearson_raw_sums(const std::vector<double>& xs, const std::vector<double>& ys) {
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const long double n = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += static_cast<long double>(xs[i]) * xs[i];
        syy += static_cast<long double>(ys[i]) * ys[i];
        sxy += static_cast<long double>(xs[i]) * ys[i];
    }
    return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

/// Sample sd via the Welford recurrence.
inline double welford_sd(const std::vector<double>& xs) {
    long double m = 0.0L, s = 0.0L;
    std::size_t k = 0;
    for (double x : xs) {
        ++k;
        const long double delta = x - m;
        m += delta / k;
        s += delta * (x - m);
    }
    return static_cast<double>(std::sqrt(s / (k - 1)));
}

/// Intersection of the scanline's line with the horizontal line y = row,
/// solved as a 2x2 linear system by Cramer's rule.
inline lvamm::Point2 intersect_row(lvamm::Point2 a, lvamm::Point2 b, double row) {
    // a + t (b - a) = (x, row):  t (b.x - a.x) - x = -a.x ;  t (b.y - a.y) = row - a.y
    const double m11 = b.x - a.x, m12 = -1.0, r1 = -a.x;
    const double m21 = b.y - a.y, m22 = 0.0, r2 = row - a.y;
    const double det = m11 * m22 - m12 * m21;
    const double t = (r1 * m22 - m12 * r2) / det;
    const double x = (m11 * r2 - m21 * r1) / det;
    (void)t;
    return {x, row};
}

} // namespace oracle

#pragma once

#include "lvamm/amm.hpp"
#include "lvamm/error.hpp"
#include "lvamm/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace lvamm {

inline constexpr std::size_t kLandmarkCount = 4;

struct HeatmapConfig {
    double sigma = 2.0;
    std::size_t v_count = kDefaultVCount;
    std::size_t w_count = kDefaultWCount;
    // Inverse temperature applied to scores before the column softmax.
    // Unit-amplitude Gaussian scores need it: softmax over values in [0, 1]
    // is close to uniform on a 256-row column.
    double softmax_beta = 20.0;
};

/// N channels of V x W scores; each channel is an Image with width W and
/// height V, so channel.at(w, v) addresses column w, row v.
struct HeatmapStack {
    std::vector<Image> channels;

    std::size_t n() const noexcept { return channels.size(); }
    std::size_t v_count() const noexcept { return channels.empty() ? 0 : channels.front().height(); }
    std::size_t w_count() const noexcept { return channels.empty() ? 0 : channels.front().width(); }

    friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;
};

inline void validate_stack(const HeatmapStack& stack) {
    if (stack.n() != kLandmarkCount) {
        fail(ErrorKind::ShapeMismatch, "heatmap stack needs " + std::to_string(kLandmarkCount) +
                                           " channels, got " + std::to_string(stack.n()));
    }
    for (const Image& channel : stack.channels) {
        if (!channel.same_shape(stack.channels.front()) || channel.empty()) {
            fail(ErrorKind::ShapeMismatch, "heatmap channels differ in shape");
        }
    }
}

/// Unit-amplitude Gaussian centred at `center` on a V x W grid.
inline Image gaussian_channel(AmmPoint center, double sigma, std::size_t v_count, std::size_t w_count) {
    Image channel(w_count, v_count);
    const double denom = 2.0 * sigma * sigma;
    for (std::size_t v = 0; v < v_count; ++v) {
        const double dy = static_cast<double>(v) - center.y;
        for (std::size_t w = 0; w < w_count; ++w) {
            const double dx = static_cast<double>(w) - center.x;
            channel.at(w, v) = std::exp(-(dx * dx + dy * dy) / denom);
        }
    }
    return channel;
}

inline HeatmapStack make_targets(std::span<const AmmPoint> amm_coords, const HeatmapConfig& cfg) {
    if (amm_coords.size() != kLandmarkCount) {
        fail(ErrorKind::CountMismatch, "expected 4 landmarks, got " + std::to_string(amm_coords.size()));
    }
    if (!(cfg.sigma > 0.0)) {
        fail(ErrorKind::InvalidArgument, "sigma must be positive");
    }
    if (cfg.v_count == 0 || cfg.w_count == 0) {
        fail(ErrorKind::InvalidArgument, "heatmap grid must be non-empty");
    }
    HeatmapStack stack;
    for (const AmmPoint& p : amm_coords) {
        const bool inside = p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(cfg.w_count - 1) &&
                            p.y <= static_cast<double>(cfg.v_count - 1);
        if (!inside) {
            fail(ErrorKind::CoordinateOutOfGrid, "landmark (" + std::to_string(p.x) + ", " +
                                                     std::to_string(p.y) + ") outside heatmap grid");
        }
        stack.channels.push_back(gaussian_channel(p, cfg.sigma, cfg.v_count, cfg.w_count));
    }
    return stack;
}

/// Softmax over rows of column `anchor_column`, then the expected row index.
/// -inf scores carry zero weight; NaN or +inf are rejected.
inline AmmPoint soft_argmax_column(const Image& h, std::size_t anchor_column, double beta = 1.0) {
    if (anchor_column >= h.width() || h.height() == 0) {
        fail(ErrorKind::IndexOutOfRange, "anchor column " + std::to_string(anchor_column) +
                                             " outside heatmap of width " + std::to_string(h.width()));
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        fail(ErrorKind::InvalidArgument, "softmax beta must be positive and finite");
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < h.height(); ++v) {
        const double s = h.at(anchor_column, v);
        if (std::isnan(s) || s == std::numeric_limits<double>::infinity()) {
            fail(ErrorKind::NonFiniteScore, "row " + std::to_string(v) + " holds a non-finite score");
        }
        peak = std::max(peak, s);
    }
    if (!std::isfinite(peak)) {
        fail(ErrorKind::NonFiniteScore, "column has no finite score");
    }
    double mass = 0.0;
    double moment = 0.0;
    for (std::size_t v = 0; v < h.height(); ++v) {
        const double weight = std::exp(beta * (h.at(anchor_column, v) - peak));
        mass += weight;
        moment += weight * static_cast<double>(v);
    }
    const double y = std::clamp(moment / mass, 0.0, static_cast<double>(h.height() - 1));
    return {static_cast<double>(anchor_column), y};
}

/// Per-channel soft-argmax, returned in ascending row order.
inline std::array<AmmPoint, kLandmarkCount> extract_landmarks(const HeatmapStack& stack,
                                                              std::size_t anchor_column, double beta = 1.0) {
    validate_stack(stack);
    std::array<AmmPoint, kLandmarkCount> points;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        points[i] = soft_argmax_column(stack.channels[i], anchor_column, beta);
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const AmmPoint& a, const AmmPoint& b) { return a.y < b.y; });
    return points;
}

} // namespace lvamm

#pragma once

// Heatmap predictors. Anything that turns an AMM image into four landmark
// heatmaps can sit behind `predict`: the built-in edge detector, or
// heatmaps computed elsewhere (a trained network) and handed over as files.

#include "lvamm/amm.hpp"
#include "lvamm/error.hpp"
#include "lvamm/heatmap.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lvamm {

enum class DetectorKind { BaselineGradient, ExternalFile };

inline constexpr std::string_view kBaselineGradientId = "baseline-gradient";
inline constexpr std::string_view kExternalFileKind = "external-file";

struct DetectorDescriptor {
    std::string id;
    DetectorKind kind = DetectorKind::BaselineGradient;
    std::map<std::string, std::string> params;
};

/// Resolves a detector id. "baseline-gradient" is the built-in edge
/// detector; "external-file:<stem>" reads <stem>.hmraw / <stem>.hmmeta.
inline DetectorDescriptor resolve_detector(std::string_view id) {
    if (id == kBaselineGradientId) {
        return {std::string(id), DetectorKind::BaselineGradient, {}};
    }
    const std::string prefix = std::string(kExternalFileKind) + ":";
    if (id.starts_with(prefix) && id.size() > prefix.size()) {
        return {std::string(id), DetectorKind::ExternalFile, {{"path", std::string(id.substr(prefix.size()))}}};
    }
    fail(ErrorKind::UnknownDetector, "no detector named '" + std::string(id) + "'");
}

struct GradientDetectorOptions {
    std::size_t window = 5;
    std::size_t min_sep = 0; // 0 selects V / 16
    double sigma = 2.0;
};

/// Centred moving average; the window shrinks at the column ends.
inline std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
    const std::size_t half = window / 2;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(values.size() - 1, i + half);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            sum += values[j];
        }
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

/// Absolute central difference, one-sided at the ends.
inline std::vector<double> gradient_magnitude(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<double> g(n, 0.0);
    if (n < 2) {
        return g;
    }
    g[0] = std::abs(values[1] - values[0]);
    g[n - 1] = std::abs(values[n - 1] - values[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        g[i] = std::abs(values[i + 1] - values[i - 1]) / 2.0;
    }
    return g;
}

/// Rows of the four strongest gradient maxima along the anchor column, top
/// to bottom, refined to the gradient centroid around each maximum.
inline std::array<double, kLandmarkCount> detect_edge_rows(std::span<const double> column,
                                                           const GradientDetectorOptions& options) {
    const std::size_t v_count = column.size();
    if (options.window == 0) {
        fail(ErrorKind::InvalidArgument, "smoothing window must be at least 1");
    }
    const std::size_t min_sep = options.min_sep == 0 ? std::max<std::size_t>(1, v_count / 16) : options.min_sep;
    const auto smoothed = moving_average(column, options.window);
    const auto g = gradient_magnitude(smoothed);

    constexpr double kFloor = 1e-12;
    std::vector<std::size_t> candidates;
    for (std::size_t v = 1; v + 1 < v_count; ++v) {
        if (g[v] > kFloor && g[v] >= g[v - 1] && g[v] > g[v + 1]) {
            candidates.push_back(v);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });

    std::vector<std::size_t> picked;
    for (std::size_t v : candidates) {
        const bool clear = std::all_of(picked.begin(), picked.end(), [&](std::size_t p) {
            return (v > p ? v - p : p - v) >= min_sep;
        });
        if (clear) {
            picked.push_back(v);
            if (picked.size() == kLandmarkCount) {
                break;
            }
        }
    }
    if (picked.size() < kLandmarkCount) {
        fail(ErrorKind::NoEdgesFound, "found " + std::to_string(picked.size()) +
                                          " separated gradient maxima, need 4");
    }
    std::sort(picked.begin(), picked.end());

    const std::size_t reach = std::max<std::size_t>(1, std::min(options.window, min_sep / 2));
    std::array<double, kLandmarkCount> rows{};
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
        const std::size_t v = picked[k];
        const std::size_t lo = v >= reach ? v - reach : 0;
        const std::size_t hi = std::min(v_count - 1, v + reach);
        double mass = 0.0;
        double moment = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            mass += g[j];
            moment += g[j] * static_cast<double>(j);
        }
        rows[k] = moment / mass;
    }
    return rows;
}

inline HeatmapStack baseline_gradient_heatmaps(const AmmImage& amm, const GradientDetectorOptions& options = {}) {
    std::vector<double> column(amm.v_count());
    for (std::size_t v = 0; v < amm.v_count(); ++v) {
        column[v] = amm.at(v, amm.anchor_column);
    }
    const auto rows = detect_edge_rows(column, options);
    HeatmapStack stack;
    for (double row : rows) {
        stack.channels.push_back(gaussian_channel({static_cast<double>(amm.anchor_column), row}, options.sigma,
                                                  amm.v_count(), amm.w_count()));
    }
    return stack;
}

// Heatmap interchange files: <stem>.hmraw holds N*V*W little-endian float32
// values, channel-major then row-major; <stem>.hmmeta is {"n":N,"v":V,"w":W}.

struct HeatmapFileShape {
    std::size_t n = 0;
    std::size_t v = 0;
    std::size_t w = 0;
};

inline std::filesystem::path heatmap_raw_path(const std::filesystem::path& stem) {
    return std::filesystem::path(stem.string() + ".hmraw");
}

inline std::filesystem::path heatmap_meta_path(const std::filesystem::path& stem) {
    return std::filesystem::path(stem.string() + ".hmmeta");
}

inline void write_heatmap_files(const HeatmapStack& stack, const std::filesystem::path& stem) {
    std::ofstream raw(heatmap_raw_path(stem), std::ios::binary);
    if (!raw) {
        fail(ErrorKind::MissingFile, "cannot write " + heatmap_raw_path(stem).string());
    }
    for (const Image& channel : stack.channels) {
        for (double value : channel.pixels()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
            const char bytes[4] = {static_cast<char>(bits & 0xffu), static_cast<char>((bits >> 8) & 0xffu),
                                   static_cast<char>((bits >> 16) & 0xffu), static_cast<char>((bits >> 24) & 0xffu)};
            raw.write(bytes, 4);
        }
    }
    std::ofstream meta(heatmap_meta_path(stem));
    meta << nlohmann::json{{"n", stack.n()}, {"v", stack.v_count()}, {"w", stack.w_count()}}.dump() << '\n';
}

inline HeatmapStack read_heatmap_files(const std::filesystem::path& stem) {
    std::ifstream meta_in(heatmap_meta_path(stem));
    if (!meta_in) {
        fail(ErrorKind::MissingFile, "cannot open " + heatmap_meta_path(stem).string());
    }
    HeatmapFileShape shape;
    try {
        const auto meta = nlohmann::json::parse(meta_in);
        shape = {meta.at("n").get<std::size_t>(), meta.at("v").get<std::size_t>(), meta.at("w").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::MalformedManifest, heatmap_meta_path(stem).string() + ": " + e.what());
    }

    std::ifstream raw_in(heatmap_raw_path(stem), std::ios::binary);
    if (!raw_in) {
        fail(ErrorKind::MissingFile, "cannot open " + heatmap_raw_path(stem).string());
    }
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(raw_in)), std::istreambuf_iterator<char>());
    const std::size_t expected = shape.n * shape.v * shape.w * 4;
    if (bytes.size() != expected) {
        fail(ErrorKind::ShapeMismatch, heatmap_raw_path(stem).string() + " holds " + std::to_string(bytes.size()) +
                                           " bytes, metadata implies " + std::to_string(expected));
    }
    HeatmapStack stack;
    std::size_t offset = 0;
    for (std::size_t c = 0; c < shape.n; ++c) {
        Image channel(shape.w, shape.v);
        for (double& value : channel.pixels()) {
            const std::uint32_t bits = std::uint32_t{bytes[offset]} | (std::uint32_t{bytes[offset + 1]} << 8) |
                                       (std::uint32_t{bytes[offset + 2]} << 16) |
                                       (std::uint32_t{bytes[offset + 3]} << 24);
            value = static_cast<double>(std::bit_cast<float>(bits));
            offset += 4;
        }
        stack.channels.push_back(std::move(channel));
    }
    return stack;
}

inline std::size_t param_size(const DetectorDescriptor& d, const std::string& key, std::size_t fallback) {
    const auto it = d.params.find(key);
    if (it == d.params.end()) {
        return fallback;
    }
    try {
        return static_cast<std::size_t>(std::stoul(it->second));
    } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, "detector parameter " + key + "='" + it->second + "' is not an integer");
    }
}

/// Runs detector `d` on `amm`; always returns 4 channels shaped like the
/// AMM image.
inline HeatmapStack predict(const AmmImage& amm, const DetectorDescriptor& d, const HeatmapConfig& cfg = {}) {
    switch (d.kind) {
    case DetectorKind::BaselineGradient: {
        GradientDetectorOptions options;
        options.window = param_size(d, "window", options.window);
        options.min_sep = param_size(d, "min_sep", 0);
        options.sigma = cfg.sigma;
        return baseline_gradient_heatmaps(amm, options);
    }
    case DetectorKind::ExternalFile: {
        const auto it = d.params.find("path");
        if (it == d.params.end()) {
            fail(ErrorKind::UnknownDetector, "external-file detector '" + d.id + "' has no path");
        }
        HeatmapStack stack = read_heatmap_files(it->second);
        if (stack.n() != kLandmarkCount || stack.v_count() != amm.v_count() || stack.w_count() != amm.w_count()) {
            fail(ErrorKind::ShapeMismatch, "heatmaps are " + std::to_string(stack.n()) + "x" +
                                               std::to_string(stack.v_count()) + "x" + std::to_string(stack.w_count()) +
                                               ", AMM needs 4x" + std::to_string(amm.v_count()) + "x" +
                                               std::to_string(amm.w_count()));
        }
        return stack;
    }
    }
    fail(ErrorKind::UnknownDetector, "detector '" + d.id + "' has an unknown kind");
}

} // namespace lvamm

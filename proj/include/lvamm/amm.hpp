#pragma once

// Anatomical motion mode (AMM) synthesis: a virtual scanline is sampled at
// equidistant points and every frame of a clip is traced along it, giving a
// V x W image whose rows are positions on the line and whose columns are
// time. Landmark coordinates move between B-mode and AMM space through the
// same sample path.

#include "lvamm/error.hpp"
#include "lvamm/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

namespace lvamm {

inline constexpr std::size_t kDefaultVCount = 256;
inline constexpr std::size_t kDefaultWCount = 64;

using BModePoint = Point2;

/// x is a time column, y a fractional index along the sample path.
struct AmmPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const AmmPoint&, const AmmPoint&) = default;
};

struct FrameSize {
    std::size_t width = 0;
    std::size_t height = 0;
};

struct Scanline {
    Point2 p_start;
    Point2 p_end;

    Point2 direction() const { return p_end - p_start; }
    double length() const { return norm(direction()); }

    friend bool operator==(const Scanline&, const Scanline&) = default;
};

inline bool inside_frame(Point2 p, FrameSize size) {
    if (size.width == 0 || size.height == 0) {
        return false;
    }
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(size.width - 1) &&
           p.y <= static_cast<double>(size.height - 1);
}

inline std::string describe(Point2 p) {
    std::ostringstream out;
    out << '(' << p.x << ", " << p.y << ')';
    return out.str();
}

/// Throws DegenerateScanline or OutOfFrame when the line is unusable on a
/// frame of the given size.
inline void validate_scanline(const Scanline& sl, std::optional<FrameSize> frame = std::nullopt) {
    if (!std::isfinite(sl.p_start.x) || !std::isfinite(sl.p_start.y) || !std::isfinite(sl.p_end.x) ||
        !std::isfinite(sl.p_end.y)) {
        fail(ErrorKind::OutOfFrame, "scanline endpoints must be finite");
    }
    if (sl.p_start == sl.p_end) {
        fail(ErrorKind::DegenerateScanline, "scanline endpoints coincide at " + describe(sl.p_start));
    }
    if (frame) {
        for (Point2 p : {sl.p_start, sl.p_end}) {
            if (!inside_frame(p, *frame)) {
                fail(ErrorKind::OutOfFrame, "scanline endpoint " + describe(p) + " outside " +
                                                std::to_string(frame->width) + "x" +
                                                std::to_string(frame->height) + " frame");
            }
        }
    }
}

struct SamplePath {
    Scanline scanline;
    std::vector<Point2> points;
    double spacing = 0.0;

    std::size_t size() const noexcept { return points.size(); }

    /// True when every sample shares the same y, so rows cannot be told
    /// apart by their y-coordinate alone.
    bool is_horizontal() const noexcept { return scanline.p_start.y == scanline.p_end.y; }
};

/// Samples `v_count` equidistant points from p_start to p_end inclusive.
inline SamplePath sample_scanline(const Scanline& sl, std::size_t v_count,
                                  std::optional<FrameSize> frame = std::nullopt) {
    if (v_count < 2) {
        fail(ErrorKind::InvalidArgument, "v_count must be at least 2");
    }
    validate_scanline(sl, frame);

    const Point2 d = sl.direction();
    const double lo_x = std::min(sl.p_start.x, sl.p_end.x);
    const double hi_x = std::max(sl.p_start.x, sl.p_end.x);
    const double lo_y = std::min(sl.p_start.y, sl.p_end.y);
    const double hi_y = std::max(sl.p_start.y, sl.p_end.y);
    const double last = static_cast<double>(v_count - 1);

    SamplePath path;
    path.scanline = sl;
    path.spacing = sl.length() / last;
    path.points.reserve(v_count);
    for (std::size_t k = 0; k < v_count; ++k) {
        const double t = static_cast<double>(k) / last;
        Point2 p = sl.p_start + t * d;
        // keep rounding from stepping outside the segment's bounding box
        p.x = std::clamp(p.x, lo_x, hi_x);
        p.y = std::clamp(p.y, lo_y, hi_y);
        path.points.push_back(p);
    }
    path.points.back() = sl.p_end;
    return path;
}

/// Bilinear interpolation of `frame` at `p`; integer coordinates return the
/// stored pixel exactly. No extrapolation.
inline double bilinear_sample(const Image& frame, Point2 p) {
    const FrameSize size{frame.width(), frame.height()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !inside_frame(p, size)) {
        fail(ErrorKind::OutOfFrame, "sample point " + describe(p) + " outside frame");
    }
    const auto cell = [](double coord, std::size_t extent) {
        if (extent == 1) {
            return std::size_t{0};
        }
        const auto i = static_cast<std::size_t>(std::floor(coord));
        return std::min(i, extent - 2);
    };
    const std::size_t x0 = cell(p.x, size.width);
    const std::size_t y0 = cell(p.y, size.height);
    const std::size_t x1 = std::min(x0 + 1, size.width - 1);
    const std::size_t y1 = std::min(y0 + 1, size.height - 1);
    const double fx = p.x - static_cast<double>(x0);
    const double fy = p.y - static_cast<double>(y0);

    const double top = frame.at(x0, y0) * (1.0 - fx) + frame.at(x1, y0) * fx;
    const double bottom = frame.at(x0, y1) * (1.0 - fx) + frame.at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

struct EchoClip {
    std::vector<Image> frames;
    std::size_t anchor_index = 0;
    double spacing_cm_per_px = 0.0;
    double frame_interval_s = 0.0;

    std::size_t frame_count() const noexcept { return frames.size(); }
    FrameSize frame_size() const {
        return frames.empty() ? FrameSize{} : FrameSize{frames.front().width(), frames.front().height()};
    }
    const Image& anchor_frame() const { return frames.at(anchor_index); }
};

/// Source frame indices for a `w_count` window centred on `anchor`; indices
/// past either end of the video repeat the edge frame.
inline std::vector<std::size_t> clip_window(std::size_t video_length, std::size_t anchor,
                                            std::size_t w_count) {
    if (video_length == 0) {
        fail(ErrorKind::EmptyVideo, "video has no frames");
    }
    if (anchor >= video_length) {
        fail(ErrorKind::IndexOutOfRange,
             "anchor " + std::to_string(anchor) + " outside video of " + std::to_string(video_length) + " frames");
    }
    if (w_count == 0) {
        fail(ErrorKind::InvalidArgument, "w_count must be at least 1");
    }
    const auto half = static_cast<long long>(w_count / 2);
    const auto last = static_cast<long long>(video_length) - 1;
    std::vector<std::size_t> indices;
    indices.reserve(w_count);
    for (std::size_t w = 0; w < w_count; ++w) {
        const long long source = static_cast<long long>(anchor) - half + static_cast<long long>(w);
        indices.push_back(static_cast<std::size_t>(std::clamp(source, 0LL, last)));
    }
    return indices;
}

/// Cuts a `w_count`-frame clip with the anchor frame at index w_count / 2.
inline EchoClip extract_clip(std::span<const Image> video, std::size_t anchor, std::size_t w_count,
                             double spacing_cm_per_px = 1.0, double frame_interval_s = 0.0) {
    if (!(spacing_cm_per_px > 0.0)) {
        fail(ErrorKind::InvalidArgument, "spacing_cm_per_px must be positive");
    }
    const auto indices = clip_window(video.size(), anchor, w_count);
    EchoClip clip;
    clip.frames.reserve(w_count);
    for (std::size_t index : indices) {
        if (!video[index].same_shape(video.front())) {
            fail(ErrorKind::DimensionMismatch, "frame " + std::to_string(index) + " differs in size");
        }
        clip.frames.push_back(video[index]);
    }
    clip.anchor_index = w_count / 2;
    clip.spacing_cm_per_px = spacing_cm_per_px;
    clip.frame_interval_s = frame_interval_s;
    return clip;
}

struct AmmImage {
    Image data; // width = W (time), height = V (position along the path)
    SamplePath path;
    std::size_t anchor_column = 0;

    std::size_t v_count() const noexcept { return data.height(); }
    std::size_t w_count() const noexcept { return data.width(); }
    double at(std::size_t v, std::size_t w) const { return data.at(w, v); }
};

inline AmmImage synthesize_amm(const EchoClip& clip, const Scanline& sl, std::size_t v_count) {
    if (clip.frames.empty()) {
        fail(ErrorKind::EmptyVideo, "clip has no frames");
    }
    const FrameSize size = clip.frame_size();
    for (const Image& frame : clip.frames) {
        if (frame.width() != size.width || frame.height() != size.height) {
            fail(ErrorKind::DimensionMismatch, "clip frames differ in size");
        }
    }

    AmmImage amm;
    amm.path = sample_scanline(sl, v_count, size);
    amm.anchor_column = clip.frames.size() / 2;
    amm.data = Image(clip.frames.size(), v_count);
    for (std::size_t w = 0; w < clip.frames.size(); ++w) {
        const Image& frame = clip.frames[w];
        for (std::size_t v = 0; v < v_count; ++v) {
            amm.data.at(w, v) = bilinear_sample(frame, amm.path.points[v]);
        }
    }
    return amm;
}

/// B-mode to AMM: x goes to the anchor column, y to the index of the path
/// sample whose y-coordinate is nearest (lower index on ties). A horizontal
/// path has no y resolution, so its samples are matched on x instead.
inline AmmPoint bmode_to_amm(BModePoint c, const SamplePath& path, std::size_t w_count) {
    if (path.points.size() < 2) {
        fail(ErrorKind::InvalidArgument, "sample path needs at least 2 points");
    }
    const bool use_x = path.is_horizontal();
    std::size_t best = 0;
    double best_distance = std::abs(use_x ? path.points[0].x - c.x : path.points[0].y - c.y);
    for (std::size_t v = 1; v < path.points.size(); ++v) {
        const double d = std::abs(use_x ? path.points[v].x - c.x : path.points[v].y - c.y);
        if (d < best_distance) {
            best_distance = d;
            best = v;
        }
    }
    return {static_cast<double>(w_count / 2), static_cast<double>(best)};
}

/// Nearest path index to a.y, with exact halves going to the lower index.
inline std::size_t nearest_path_index(double y, std::size_t v_count) {
    const double last = static_cast<double>(v_count - 1);
    if (!std::isfinite(y) || y < 0.0 || y > last) {
        std::ostringstream msg;
        msg << "AMM row " << y << " outside [0, " << last << "]";
        fail(ErrorKind::IndexOutOfRange, msg.str());
    }
    return static_cast<std::size_t>(std::ceil(y - 0.5));
}

/// AMM to B-mode: the result is always one of the path samples, so it lies
/// on the scanline.
inline BModePoint amm_to_bmode(AmmPoint a, const SamplePath& path) {
    return path.points[nearest_path_index(a.y, path.points.size())];
}

} // namespace lvamm

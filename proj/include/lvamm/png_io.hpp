#pragma once

// 8-bit grayscale PNG encode/decode through libpng, in memory. Decoded
// intensities are normalised to [0, 1].

#include "lvamm/error.hpp"
#include "lvamm/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lvamm {

inline constexpr const char* kCoordinateConvention = "origin top-left, x rightward, y downward, units pixels";

inline std::uint8_t to_byte(double intensity) {
    // NaN maps to 0
    const double scaled = intensity > 0.0 ? std::min(intensity, 1.0) * 255.0 : 0.0;
    return static_cast<std::uint8_t>(scaled + 0.5);
}

namespace detail {

struct PngReadCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

inline void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->bytes.size()) {
        png_error(png, "truncated PNG data");
    }
    std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
    cursor->offset += length;
}

inline void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

inline void png_flush_callback(png_structp) {}

[[noreturn]] inline void png_error_callback(png_structp, png_const_charp message) {
    throw Error(ErrorKind::MalformedManifest, std::string("PNG: ") + message);
}

inline void png_warning_callback(png_structp, png_const_charp) {}

} // namespace detail

/// Encodes as 8-bit grayscale; `text` entries become tEXt chunks.
inline std::vector<std::uint8_t> encode_png(const Image& image,
                                            std::span<const std::pair<std::string, std::string>> text = {}) {
    if (image.empty()) {
        fail(ErrorKind::InvalidArgument, "cannot encode an empty image");
    }
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_callback,
                                              detail::png_warning_callback);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* png;
        png_infop* info;
        ~Guard() { png_destroy_write_struct(png, info); }
    } guard{&png, &info};

    png_set_write_fn(png, &out, detail::png_write_callback, detail::png_flush_callback);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // noisy frames barely compress; favour speed
    png_set_compression_level(png, 1);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);

    std::vector<png_text> chunks(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        chunks[i] = png_text{};
        chunks[i].compression = PNG_TEXT_COMPRESSION_NONE;
        chunks[i].key = const_cast<char*>(text[i].first.c_str());
        chunks[i].text = const_cast<char*>(text[i].second.c_str());
        chunks[i].text_length = text[i].second.size();
    }
    if (!chunks.empty()) {
        png_set_text(png, info, chunks.data(), static_cast<int>(chunks.size()));
    }
    png_write_info(png, info);

    std::vector<std::uint8_t> row(image.width());
    for (std::size_t y = 0; y < image.height(); ++y) {
        std::transform(image.row(y).begin(), image.row(y).end(), row.begin(), to_byte);
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    return out;
}

/// Decodes any PNG to grayscale in [0, 1] (8-bit levels / 255).
inline Image decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        fail(ErrorKind::MalformedManifest, "not a PNG stream");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_callback,
                                             detail::png_warning_callback);
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* png;
        png_infop* info;
        ~Guard() { png_destroy_read_struct(png, info, nullptr); }
    } guard{&png, &info};

    detail::PngReadCursor cursor{bytes, 0};
    png_set_read_fn(png, &cursor, detail::png_read_callback);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) {
        png_set_strip_16(png);
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);

    const std::size_t width = png_get_image_width(png, info);
    const std::size_t height = png_get_image_height(png, info);
    const std::size_t channels = png_get_channels(png, info);
    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    Image image(width, height);
    for (std::size_t y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (std::size_t x = 0; x < width; ++x) {
            image.at(x, y) = static_cast<double>(row[x * channels]) / 255.0;
        }
    }
    png_read_end(png, nullptr);
    return image;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::MissingFile, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::MissingFile, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Image read_png(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_png(bytes);
    } catch (const Error& e) {
        fail(e.kind(), path.string() + ": " + e.detail());
    }
}

inline void write_png(const std::filesystem::path& path, const Image& image,
                      std::span<const std::pair<std::string, std::string>> text = {}) {
    write_file_bytes(path, encode_png(image, text));
}

} // namespace lvamm

#pragma once

// Minimal RGB PNG writer (single IDAT, filter 0, zlib level 9) plus a
// cubehelix colour table for phase-space heatmaps. Output depends only on the
// pixel data, so identical fields produce identical files.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/io.hpp"

namespace ckd {

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major, top row first

    void set(std::size_t col, std::size_t row, std::uint8_t r, std::uint8_t g,
             std::uint8_t b) {
        if (col >= width || row >= height) return;
        const std::size_t i = 3 * (row * width + col);
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }
};

// Green's cubehelix: perceptually monotone lightness, safe in greyscale.
inline const std::array<std::array<std::uint8_t, 3>, 256>& cubehelix_table() {
    static const auto table = [] {
        std::array<std::array<std::uint8_t, 3>, 256> t{};
        const double start = 0.5, rot = -1.5, hue = 1.2;
        for (int i = 0; i < 256; ++i) {
            const double l = i / 255.0;
            const double phi = 2.0 * pi * (start / 3.0 + rot * l);
            const double amp = hue * l * (1.0 - l) / 2.0;
            const double c = std::cos(phi), s = std::sin(phi);
            const double rgb[3] = {l + amp * (-0.14861 * c + 1.78277 * s),
                                   l + amp * (-0.29227 * c - 0.90649 * s),
                                   l + amp * (1.97294 * c)};
            for (int ch = 0; ch < 3; ++ch)
                t[i][ch] = static_cast<std::uint8_t>(
                    std::lround(255.0 * std::clamp(rgb[ch], 0.0, 1.0)));
        }
        return t;
    }();
    return table;
}

// values[ix * np + ip] with ip increasing upward in the rendered image.
inline Image render_heatmap(const std::vector<double>& values, std::size_t nx, std::size_t np,
                            double vmin, double vmax) {
    if (values.size() != nx * np) throw ConfigError("render_heatmap: size mismatch");
    if (!(vmax > vmin)) throw ConfigError("render_heatmap: empty value range");
    Image img;
    img.width = nx;
    img.height = np;
    img.rgb.assign(3 * nx * np, 0);
    const auto& cmap = cubehelix_table();
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t ip = 0; ip < np; ++ip) {
            const double v = (values[ix * np + ip] - vmin) / (vmax - vmin);
            const int idx =
                static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
            const auto& c = cmap[static_cast<std::size_t>(idx)];
            img.set(ix, np - 1 - ip, c[0], c[1], c[2]);
        }
    }
    return img;
}

// Maps a phase-space point to pixel coordinates of a heatmap rendered over
// [x_lo, x_hi] x [P_lo, P_hi]; returns false when outside the window.
inline bool phase_point_to_pixel(double x, double P, double x_lo, double x_hi, double P_lo,
                                 double P_hi, std::size_t nx, std::size_t np,
                                 std::size_t& col, std::size_t& row) {
    const double fx = (x - x_lo) / (x_hi - x_lo);
    const double fp = (P - P_lo) / (P_hi - P_lo);
    if (fx < 0.0 || fx > 1.0 || fp < 0.0 || fp > 1.0) return false;
    col = std::min(nx - 1, static_cast<std::size_t>(fx * static_cast<double>(nx)));
    const std::size_t ip =
        std::min(np - 1, static_cast<std::size_t>(fp * static_cast<double>(np)));
    row = np - 1 - ip;
    return true;
}

inline void draw_plus(Image& img, std::size_t col, std::size_t row, std::uint8_t r,
                      std::uint8_t g, std::uint8_t b) {
    img.set(col, row, r, g, b);
    if (col > 0) img.set(col - 1, row, r, g, b);
    img.set(col + 1, row, r, g, b);
    if (row > 0) img.set(col, row - 1, r, g, b);
    img.set(col, row + 1, r, g, b);
}

namespace detail {

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
    auto put_u32 = [&out](std::uint32_t v) {
        out.push_back(std::uint8_t(v >> 24));
        out.push_back(std::uint8_t(v >> 16));
        out.push_back(std::uint8_t(v >> 8));
        out.push_back(std::uint8_t(v));
    };
    put_u32(static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.width == 0 || img.height == 0 || img.rgb.size() != 3 * img.width * img.height)
        throw ConfigError("encode_png: malformed image");
    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

    std::vector<std::uint8_t> ihdr;
    auto put_u32 = [&ihdr](std::uint32_t v) {
        ihdr.push_back(std::uint8_t(v >> 24));
        ihdr.push_back(std::uint8_t(v >> 16));
        ihdr.push_back(std::uint8_t(v >> 8));
        ihdr.push_back(std::uint8_t(v));
    };
    put_u32(static_cast<std::uint32_t>(img.width));
    put_u32(static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // truecolour
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::png_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> raw;
    raw.reserve((3 * img.width + 1) * img.height);
    for (std::size_t row = 0; row < img.height; ++row) {
        raw.push_back(0);  // filter: none
        const auto* r = img.rgb.data() + 3 * row * img.width;
        raw.insert(raw.end(), r, r + 3 * img.width);
    }
    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> idat(bound);
    if (::compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw IoError("encode_png: deflate failed");
    idat.resize(bound);
    detail::png_chunk(out, "IDAT", idat);
    detail::png_chunk(out, "IEND", {});
    return out;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
    write_binary_file(path, encode_png(img));
}

}  // namespace ckd

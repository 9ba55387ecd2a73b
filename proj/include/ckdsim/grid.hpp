#pragma once

#include <cstddef>
#include <string>

#include "ckdsim/duffing.hpp"

namespace ckd {

// Uniform periodic grid of M = 2^N points on [x_min, x_max); node j sits at
// x_min + j dx. The conjugate wavevectors follow the usual FFT layout
// q' = 0, 1, ..., M/2-1, -M/2, ..., -1 with k_q = 2 pi q' / (M dx).
struct SpatialGrid {
    double x_min = -12.0;
    double x_max = 12.0;
    std::size_t m = 1024;

    double length() const { return x_max - x_min; }
    double dx() const { return length() / static_cast<double>(m); }
    double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx(); }

    double wavevector(std::size_t q) const {
        const auto half = m / 2;
        const double qs = (q < half) ? static_cast<double>(q)
                                     : static_cast<double>(q) - static_cast<double>(m);
        return 2.0 * pi * qs / (static_cast<double>(m) * dx());
    }

    double k_nyquist() const { return pi / dx(); }

    bool operator==(const SpatialGrid& o) const {
        return x_min == o.x_min && x_max == o.x_max && m == o.m;
    }
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline SpatialGrid make_grid(double x_min, double x_max, std::size_t m) {
    if (!(x_max > x_min))
        throw ConfigError("grid: x_max must exceed x_min");
    if (!std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("grid: non-finite bounds");
    if (!is_power_of_two(m) || m < 8 || m > (std::size_t{1} << 22))
        throw ConfigError("grid.points must be a power of two in [8, 2^22], got " +
                          std::to_string(m));
    return SpatialGrid{x_min, x_max, m};
}

}  // namespace ckd

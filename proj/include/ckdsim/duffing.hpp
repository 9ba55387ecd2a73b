#pragma once

// Driven, damped Duffing oscillator and the exponential scale factor of the
// Caldirola-Kanai description of its dissipation.
//
//   m x'' + delta m x' + V'(x,t) = 0,   V = alpha x^2/2 + beta x^4/4 - gamma x cos(omega t)
//
// The canonical (CK) picture rescales momenta by a(t) = exp(-delta t); the
// effective Planck constant inherits the same factor, hbar(t) = hbar a(t).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ckd {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

// shortest round-trip decimal form; std::to_string would flatten small
// magnitudes to 0.000000 in diagnostics
inline std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

constexpr double pi = 3.14159265358979323846;

struct DuffingParams {
    double alpha = -1.0;   // linear stiffness (negative: double well)
    double beta  = 0.25;   // cubic stiffness
    double delta = 0.1;    // damping rate
    double gamma = 2.5;    // drive amplitude
    double omega = 2.0;    // drive frequency
    double mass  = 1.0;
    double hbar  = 1.0;

    double drive_period() const { return 2.0 * pi / omega; }

    void validate() const {
        auto bad = [](double v) { return !std::isfinite(v); };
        if (bad(alpha) || bad(beta) || bad(gamma))
            throw ConfigError("params: non-finite coefficient");
        if (bad(delta) || delta < 0.0)
            throw ConfigError("params.delta must be finite and >= 0");
        if (bad(omega) || omega <= 0.0)
            throw ConfigError("params.omega must be finite and > 0");
        if (bad(mass) || mass <= 0.0)
            throw ConfigError("params.mass must be finite and > 0");
        if (bad(hbar) || hbar <= 0.0)
            throw ConfigError("params.hbar must be finite and > 0");
    }
};

// Initial minimum-uncertainty packet: centre (x0, p0), spatial width sigma.
struct GaussianState {
    double x0 = 1.0;
    double p0 = -1.5;
    double sigma = 0.5;

    void validate() const {
        if (!std::isfinite(x0) || !std::isfinite(p0))
            throw ConfigError("initial: non-finite centre");
        if (!std::isfinite(sigma) || sigma <= 0.0)
            throw ConfigError("initial.sigma must be finite and > 0");
    }
};

// a(t) = exp(-delta t); a(0) = 1, and a(t1 + t2) = a(t1) a(t2).
inline double damping_factor(const DuffingParams& p, double t) {
    return std::exp(-p.delta * t);
}

// hbar(t) = hbar a(t)
inline double effective_hbar(const DuffingParams& p, double t) {
    return p.hbar * damping_factor(p, t);
}

inline double potential(const DuffingParams& p, double x, double t) {
    const double x2 = x * x;
    return 0.5 * p.alpha * x2 + 0.25 * p.beta * x2 * x2
           - p.gamma * x * std::cos(p.omega * t);
}

// -dV/dx
inline double potential_force(const DuffingParams& p, double x, double t) {
    return -(p.alpha * x + p.beta * x * x * x) + p.gamma * std::cos(p.omega * t);
}

// d^2V/dx^2, the curvature entering the tangent (stability) dynamics
inline double potential_curvature(const DuffingParams& p, double x) {
    return p.alpha + 3.0 * p.beta * x * x;
}

// FNV-1a over the raw bit patterns of the parameter tuple, used to tag
// wavefunction checkpoints so mismatched reloads are detectable.
inline std::uint64_t params_fingerprint(const DuffingParams& p) {
    const double vals[] = {p.alpha, p.beta, p.delta, p.gamma,
                           p.omega, p.mass, p.hbar};
    std::uint64_t h = 1469598103934665603ull;
    for (double v : vals) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof v);
        __builtin_memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace ckd

#pragma once

#include <complex>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/fft.hpp"
#include "ckdsim/grid.hpp"

namespace ckd {

using cplx = std::complex<double>;

// Discretised wavefunction in the canonical (CK) picture. amp[j] is psi at
// grid node j; t is the physical time the state belongs to.
struct WaveFunction {
    SpatialGrid grid;
    double t = 0.0;
    std::vector<cplx> amp;
};

inline double norm_squared(const WaveFunction& w) {
    double s = 0.0;
    for (const auto& a : w.amp) s += std::norm(a);
    return s * w.grid.dx();
}

inline double norm(const WaveFunction& w) { return std::sqrt(norm_squared(w)); }

// psi(x) = (2 pi sigma^2)^{-1/4} exp[-(x-x0)^2/(4 sigma^2) + i p0 (x-x0)/hbar],
// renormalised so the grid sum is exactly 1. The packet must fit: both
// x0 - 6 sigma and x0 + 6 sigma are required to lie inside the grid.
inline WaveFunction init_gaussian(const SpatialGrid& g, const GaussianState& s,
                                  const DuffingParams& p, double t0 = 0.0) {
    s.validate();
    p.validate();
    if (s.x0 - 6.0 * s.sigma < g.x_min || s.x0 + 6.0 * s.sigma > g.x_max)
        throw ConfigError("init_gaussian: 6 sigma support exceeds the grid");
    WaveFunction w{g, t0, std::vector<cplx>(g.m)};
    const double pref = std::pow(2.0 * pi * s.sigma * s.sigma, -0.25);
    for (std::size_t j = 0; j < g.m; ++j) {
        const double d = g.x(j) - s.x0;
        w.amp[j] = pref * std::exp(-d * d / (4.0 * s.sigma * s.sigma)) *
                   std::polar(1.0, s.p0 * d / p.hbar);
    }
    const double n = norm(w);
    for (auto& a : w.amp) a /= n;
    return w;
}

// x psi
inline WaveFunction apply_position(const WaveFunction& w) {
    WaveFunction out = w;
    for (std::size_t j = 0; j < w.grid.m; ++j)
        out.amp[j] *= w.grid.x(j);
    return out;
}

// p psi via the spectral multiplier hbar k_q (canonical momentum)
inline WaveFunction apply_canonical_momentum(const WaveFunction& w, const DuffingParams& p,
                                             const Fft& fft) {
    WaveFunction out = w;
    fft.forward(out.amp);
    for (std::size_t q = 0; q < w.grid.m; ++q)
        out.amp[q] *= p.hbar * w.grid.wavevector(q);
    fft.inverse(out.amp);
    return out;
}

inline double position_moment(const WaveFunction& w, int n) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.grid.m; ++j)
        s += std::norm(w.amp[j]) * std::pow(w.grid.x(j), n);
    return s * w.grid.dx();
}

// <V(x, t)> at the state's own time
inline double mean_potential(const WaveFunction& w, const DuffingParams& p) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.grid.m; ++j)
        s += std::norm(w.amp[j]) * potential(p, w.grid.x(j), w.t);
    return s * w.grid.dx();
}

// <V'(x, t)>, the gradient term of the Ehrenfest momentum relation
inline double mean_potential_gradient(const WaveFunction& w, const DuffingParams& p) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.grid.m; ++j)
        s -= std::norm(w.amp[j]) * potential_force(p, w.grid.x(j), w.t);
    return s * w.grid.dx();
}

// Row of the observables series. mean_P is the mechanical momentum a(t)<p>;
// energy is the mechanical E = <P^2>/2m + <V> = a(t) <H_CK>.
struct Observables {
    double t = 0.0;
    double norm = 0.0;
    double mean_x = 0.0;
    double mean_P = 0.0;
    double energy = 0.0;
};

inline Observables observables(const WaveFunction& w, const DuffingParams& p,
                               const Fft& fft) {
    Observables o;
    o.t = w.t;
    const double n2 = norm_squared(w);
    o.norm = std::sqrt(n2);
    double sx = 0.0, sv = 0.0;
    for (std::size_t j = 0; j < w.grid.m; ++j) {
        const double w2 = std::norm(w.amp[j]);
        sx += w2 * w.grid.x(j);
        sv += w2 * potential(p, w.grid.x(j), w.t);
    }
    sx *= w.grid.dx() / n2;
    sv *= w.grid.dx() / n2;

    std::vector<cplx> spec = w.amp;
    fft.forward(spec);
    double wsum = 0.0, p1 = 0.0, p2 = 0.0;
    for (std::size_t q = 0; q < w.grid.m; ++q) {
        const double pw = std::norm(spec[q]);
        const double k = w.grid.wavevector(q);
        wsum += pw;
        p1 += pw * k;
        p2 += pw * k * k;
    }
    const double a = damping_factor(p, w.t);
    const double mp = p.hbar * p1 / wsum;        // <p>
    const double mp2 = p.hbar * p.hbar * p2 / wsum;  // <p^2>
    o.mean_x = sx;
    o.mean_P = a * mp;
    o.energy = a * a * mp2 / (2.0 * p.mass) + sv;
    return o;
}

// Mass in the outer fraction of nodes on each side; the leakage monitor.
inline double boundary_mass(const WaveFunction& w, double edge_fraction = 0.05) {
    const auto nb = static_cast<std::size_t>(edge_fraction * static_cast<double>(w.grid.m));
    double s = 0.0;
    for (std::size_t j = 0; j < nb; ++j)
        s += std::norm(w.amp[j]) + std::norm(w.amp[w.grid.m - 1 - j]);
    return s * w.grid.dx();
}

// Spectral mass in the outer fraction of wavenumbers; grows sharply once the
// canonical momentum content p = P/a(t) approaches the grid Nyquist limit.
inline double spectral_tail_mass(const WaveFunction& w, const Fft& fft,
                                 double edge_fraction = 0.05) {
    std::vector<cplx> spec = w.amp;
    fft.forward(spec);
    const auto m = w.grid.m;
    const auto nb = static_cast<std::size_t>(edge_fraction * static_cast<double>(m));
    double tail = 0.0, total = 0.0;
    for (std::size_t q = 0; q < m; ++q) total += std::norm(spec[q]);
    for (std::size_t j = 0; j < nb; ++j) {
        tail += std::norm(spec[m / 2 + j]);
        tail += std::norm(spec[m / 2 - 1 - j]);
    }
    return tail / total;
}

}  // namespace ckd

#pragma once

// Out-of-time-order correlator for the damped oscillator,
//   C(t) = || [x(t), p] psi0 ||^2 / hbar^2,
// with x(t) = U(t)^dag x U(t) and p the canonical momentum. The canonical
// commutator [x, p] = i hbar is time independent, so the constant hbar^2 is
// the right scale: C(0) = 1 and the log-slope of the growth window is 2x the
// tangent-flow exponent of d x(t) / d p(0), directly comparable to the
// classical Lyapunov exponent. Dividing by the shrinking effective
// hbar(t)^2 instead would add 2 delta to the slope and make the fitted rate
// grow with damping, inverting the expected ordering. Each sample needs one
// shared forward evolution and two backward evolutions:
//   term1 = U^dag x U (p psi0),   term2 = p (U^dag x U psi0).
// The forward pass stores both branches at every sample time; the backward
// passes are independent across samples and run in parallel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/fft.hpp"
#include "ckdsim/parallel.hpp"
#include "ckdsim/propagator.hpp"
#include "ckdsim/wavefunction.hpp"

namespace ckd {

struct OtocPoint {
    double t = 0.0;
    double c = 0.0;
};

struct OtocSeries {
    std::vector<OtocPoint> points;
    double dt = 0.0;
};

struct OtocOptions {
    double dt = 1e-3;
    double boundary_threshold = 1e-8;
    double spectral_tail_threshold = 1e-8;
    std::size_t monitor_stride = 64;
    unsigned nthreads = 0;
};

// Samples C(t) at the given times (absolute, ascending, each a whole number
// of steps from psi0.t). The first sample may equal psi0.t.
inline OtocSeries otoc_series(const WaveFunction& psi0, const DuffingParams& pr,
                              const std::vector<double>& times, const OtocOptions& opt) {
    if (opt.dt <= 0.0) throw ConfigError("otoc: dt must be > 0");
    if (times.empty()) throw ConfigError("otoc: no sample times");
    const double t0 = psi0.t;
    std::vector<double> ts = times;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double steps = (ts[i] - t0) / opt.dt;
        const double snapped = t0 + std::llround(steps) * opt.dt;
        if (steps < -0.5 || std::abs(ts[i] - snapped) > 1e-6 * std::max(1.0, std::abs(ts[i])))
            throw ConfigError("otoc: sample times must be whole steps after the initial time");
        ts[i] = snapped;
        if (i > 0 && ts[i] <= ts[i - 1])
            throw ConfigError("otoc: sample times must be strictly ascending");
    }

    EvolveOptions eopt;
    eopt.dt = opt.dt;
    eopt.boundary_threshold = opt.boundary_threshold;
    eopt.spectral_tail_threshold = opt.spectral_tail_threshold;
    eopt.monitor_stride = opt.monitor_stride;

    Fft fft(psi0.grid.m);
    WaveFunction psi = psi0;
    WaveFunction phi = apply_canonical_momentum(psi0, pr, fft);

    std::vector<WaveFunction> psi_snap, phi_snap;
    psi_snap.reserve(ts.size());
    phi_snap.reserve(ts.size());
    for (const double t : ts) {
        evolve(psi, pr, t, eopt, fft);
        evolve(phi, pr, t, eopt, fft);
        psi_snap.push_back(psi);
        phi_snap.push_back(phi);
    }

    OtocSeries out;
    out.dt = opt.dt;
    out.points.resize(ts.size());
    parallel_for(ts.size(), opt.nthreads, [&](std::size_t i) {
        thread_local std::unique_ptr<Fft> tfft;
        if (!tfft || tfft->size() != psi0.grid.m) tfft = std::make_unique<Fft>(psi0.grid.m);
        WaveFunction b1 = apply_position(phi_snap[i]);
        WaveFunction b2 = apply_position(psi_snap[i]);
        evolve_backward(b1, pr, t0, eopt, *tfft);
        evolve_backward(b2, pr, t0, eopt, *tfft);
        const WaveFunction p_b2 = apply_canonical_momentum(b2, pr, *tfft);
        double nr2 = 0.0;
        for (std::size_t j = 0; j < b1.amp.size(); ++j)
            nr2 += std::norm(b1.amp[j] - p_b2.amp[j]);
        nr2 *= psi0.grid.dx();
        out.points[i] = {ts[i], nr2 / (pr.hbar * pr.hbar)};
    });
    return out;
}

inline OtocPoint otoc_at(const WaveFunction& psi0, const DuffingParams& pr, double t,
                         const OtocOptions& opt) {
    return otoc_series(psi0, pr, {t}, opt).points.front();
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                            std::size_t lo, std::size_t n) {
    LinearFit f;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[lo + i];
        sy += ys[lo + i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[lo + i] - mx, dy = ys[lo + i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = syy - f.slope * sxy;
    f.r2 = (syy > 0.0) ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 0.0;
    return f;
}

struct QuantumLyapunovFit {
    bool ok = false;
    double lambda = 0.0;   // slope of ln C over the window, halved
    double slope = 0.0;
    double r2 = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t n_points = 0;
};

// Exponential-growth window selection: over the (t, ln C) series, slide a
// fixed-length linear fit and keep positions with r^2 at or above the cut;
// the longest contiguous run of such positions is the growth window, and the
// reported rate is half the slope of the single fit across it.
inline QuantumLyapunovFit fit_quantum_lyapunov(const OtocSeries& s, double r2_min = 0.995,
                                               std::size_t roll = 10) {
    QuantumLyapunovFit out;
    if (roll < 3) throw ConfigError("otoc fit: rolling window must be >= 3 points");
    std::vector<double> ts, ln_c;
    for (const auto& p : s.points) {
        if (p.c > 0.0 && std::isfinite(p.c)) {
            ts.push_back(p.t);
            ln_c.push_back(std::log(p.c));
        }
    }
    if (ts.size() < roll) return out;

    std::vector<bool> good(ts.size() - roll + 1);
    for (std::size_t i = 0; i < good.size(); ++i)
        good[i] = linear_fit(ts, ln_c, i, roll).r2 >= r2_min;

    std::size_t best_lo = 0, best_len = 0;
    std::size_t i = 0;
    while (i < good.size()) {
        if (!good[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < good.size() && good[j]) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_lo = i;
        }
        i = j;
    }
    if (best_len == 0) return out;

    const std::size_t n = best_len + roll - 1;
    const LinearFit f = linear_fit(ts, ln_c, best_lo, n);
    out.ok = true;
    out.slope = f.slope;
    out.lambda = 0.5 * f.slope;
    out.r2 = f.r2;
    out.t_lo = ts[best_lo];
    out.t_hi = ts[best_lo + n - 1];
    out.n_points = n;
    return out;
}

// Fixed-window variant for when the growth region is known a priori.
inline QuantumLyapunovFit fit_quantum_lyapunov_window(const OtocSeries& s, double t_lo,
                                                      double t_hi) {
    QuantumLyapunovFit out;
    std::vector<double> ts, ln_c;
    for (const auto& p : s.points) {
        if (p.t >= t_lo && p.t <= t_hi && p.c > 0.0 && std::isfinite(p.c)) {
            ts.push_back(p.t);
            ln_c.push_back(std::log(p.c));
        }
    }
    if (ts.size() < 3) return out;
    const LinearFit f = linear_fit(ts, ln_c, 0, ts.size());
    out.ok = true;
    out.slope = f.slope;
    out.lambda = 0.5 * f.slope;
    out.r2 = f.r2;
    out.t_lo = ts.front();
    out.t_hi = ts.back();
    out.n_points = ts.size();
    return out;
}

}  // namespace ckd

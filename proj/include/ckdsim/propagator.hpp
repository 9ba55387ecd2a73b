#pragma once

// Split-operator propagator for the CK Hamiltonian
//   H(t) = a(t) p^2 / 2m + V(x, t) / a(t)
// over one step [t, t+dt]:
//   U ~ e^{-i V dt / (2 hbar a)} e^{-i a hbar k^2 dt / 2m} e^{-i V dt / (2 hbar a)}
// with every time-dependent coefficient frozen at t_mid = t + dt/2. The
// scheme is strictly unitary and second order in dt.

#include <cstdint>
#include <functional>

#include "ckdsim/duffing.hpp"
#include "ckdsim/fft.hpp"
#include "ckdsim/wavefunction.hpp"

namespace ckd {

inline void potential_half_step(WaveFunction& w, const DuffingParams& p, double t_mid,
                                double dt) {
    const double c = 0.5 * dt / (p.hbar * damping_factor(p, t_mid));
    const double drive = p.gamma * std::cos(p.omega * t_mid);
    for (std::size_t j = 0; j < w.grid.m; ++j) {
        const double x = w.grid.x(j);
        const double x2 = x * x;
        const double v = 0.5 * p.alpha * x2 + 0.25 * p.beta * x2 * x2 - drive * x;
        w.amp[j] *= std::polar(1.0, -c * v);
    }
}

inline void kinetic_full_step(WaveFunction& w, const DuffingParams& p, double t_mid,
                              double dt, const Fft& fft) {
    const double c = p.hbar * damping_factor(p, t_mid) * dt / (2.0 * p.mass);
    fft.forward(w.amp);
    for (std::size_t q = 0; q < w.grid.m; ++q) {
        const double k = w.grid.wavevector(q);
        w.amp[q] *= std::polar(1.0, -c * k * k);
    }
    fft.inverse(w.amp);
}

// One V-T-V step from w.t to w.t + dt; both potential factors use t_mid.
inline void step_vtv(WaveFunction& w, const DuffingParams& p, double dt, const Fft& fft) {
    const double t_mid = w.t + 0.5 * dt;
    potential_half_step(w, p, t_mid, dt);
    kinetic_full_step(w, p, t_mid, dt, fft);
    potential_half_step(w, p, t_mid, dt);
    w.t += dt;
}

// Adjoint of one step whose midpoint was t_mid; rewinds w.t by dt.
inline void step_vtv_adjoint(WaveFunction& w, const DuffingParams& p, double t_mid,
                             double dt, const Fft& fft) {
    potential_half_step(w, p, t_mid, -dt);
    kinetic_full_step(w, p, t_mid, -dt, fft);
    potential_half_step(w, p, t_mid, -dt);
    w.t -= dt;
}

struct EvolveOptions {
    double dt = 1e-3;
    double boundary_threshold = 1e-8;       // abort when edge mass exceeds this
    double spectral_tail_threshold = 1e-8;  // abort when k content hits the grid edge
    std::size_t monitor_stride = 64;        // steps between monitor evaluations
    std::size_t checkpoint_stride = 0;      // 0: no checkpoints
};

struct StepAnchor {
    double t0;       // lattice-aligned start time
    std::int64_t j0;  // global step index of t0, valid when aligned
    bool aligned;
};

// Snap a time onto the global dt lattice anchored at t = 0 so that forward
// and backward passes over the same interval reproduce identical midpoint
// times (and hence identical phase factors) bit for bit.
inline StepAnchor anchor_time(double t, double dt) {
    const auto j = static_cast<std::int64_t>(std::llround(t / dt));
    const double snapped = static_cast<double>(j) * dt;
    if (std::abs(snapped - t) <= 1e-9 * std::max(1.0, std::abs(t)))
        return {snapped, j, true};
    return {t, 0, false};
}

inline double midpoint_time(const StepAnchor& a, std::int64_t i, double dt) {
    if (a.aligned)
        return (static_cast<double>(a.j0 + i) + 0.5) * dt;
    return a.t0 + (static_cast<double>(i) + 0.5) * dt;
}

using CheckpointFn = std::function<void(const WaveFunction&)>;

// March w forward to t_end (snapped to a whole number of steps; the snap
// distance is returned). Boundary and spectral-tail monitors run every
// monitor_stride steps and at the end, throwing NumericalError on overflow
// of either threshold. checkpoint_stride > 0 invokes on_checkpoint after
// every such number of steps (and never at t = start).
inline double evolve(WaveFunction& w, const DuffingParams& p, double t_end,
                     const EvolveOptions& opt, const Fft& fft,
                     const CheckpointFn& on_checkpoint = {}) {
    if (opt.dt <= 0.0) throw ConfigError("evolve: dt must be positive");
    if (t_end < w.t - 1e-12) throw ConfigError("evolve: t_end precedes state time");
    const auto n = static_cast<std::int64_t>(std::llround((t_end - w.t) / opt.dt));
    const double snap = std::abs((w.t + static_cast<double>(n) * opt.dt) - t_end);
    const StepAnchor anc = anchor_time(w.t, opt.dt);

    auto check = [&](std::int64_t step) {
        const double bm = boundary_mass(w);
        if (!(bm <= opt.boundary_threshold))
            throw NumericalError("evolve: boundary mass " + format_double(bm) +
                                 " exceeded threshold at t=" + std::to_string(w.t) +
                                 " (step " + std::to_string(step) + ")");
        const double km = spectral_tail_mass(w, fft);
        if (!(km <= opt.spectral_tail_threshold))
            throw NumericalError("evolve: spectral tail mass " + format_double(km) +
                                 " exceeded threshold at t=" + std::to_string(w.t) +
                                 " (step " + std::to_string(step) + ")");
    };

    for (std::int64_t i = 0; i < n; ++i) {
        const double t_mid = midpoint_time(anc, i, opt.dt);
        potential_half_step(w, p, t_mid, opt.dt);
        kinetic_full_step(w, p, t_mid, opt.dt, fft);
        potential_half_step(w, p, t_mid, opt.dt);
        w.t = anc.aligned ? static_cast<double>(anc.j0 + i + 1) * opt.dt
                          : anc.t0 + static_cast<double>(i + 1) * opt.dt;
        if (opt.monitor_stride && (i + 1) % static_cast<std::int64_t>(opt.monitor_stride) == 0)
            check(i + 1);
        if (on_checkpoint && opt.checkpoint_stride &&
            (i + 1) % static_cast<std::int64_t>(opt.checkpoint_stride) == 0)
            on_checkpoint(w);
    }
    if (n > 0) check(n);
    return snap;
}

// Run the adjoint factors in reverse order from w.t down to t_start, using
// the same midpoint lattice as the forward pass over that interval. The
// interval must be a whole number of steps (within rounding).
inline void evolve_backward(WaveFunction& w, const DuffingParams& p, double t_start,
                            const EvolveOptions& opt, const Fft& fft) {
    if (opt.dt <= 0.0) throw ConfigError("evolve_backward: dt must be positive");
    const double span = w.t - t_start;
    if (span < -1e-12) throw ConfigError("evolve_backward: t_start exceeds state time");
    const auto n = static_cast<std::int64_t>(std::llround(span / opt.dt));
    if (std::abs(static_cast<double>(n) * opt.dt - span) >
        1e-6 * std::max(1.0, std::abs(span)))
        throw ConfigError("evolve_backward: interval is not a whole number of steps");
    const StepAnchor anc = anchor_time(t_start, opt.dt);
    for (std::int64_t i = n - 1; i >= 0; --i) {
        const double t_mid = midpoint_time(anc, i, opt.dt);
        step_vtv_adjoint(w, p, t_mid, opt.dt, fft);
        w.t = anc.aligned ? static_cast<double>(anc.j0 + i) * opt.dt
                          : anc.t0 + static_cast<double>(i) * opt.dt;
    }
}

}  // namespace ckd

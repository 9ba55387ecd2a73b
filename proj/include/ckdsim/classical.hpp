#pragma once

// Classical side of the model: trajectories, stroboscopic ensembles, tangent
// (stability) dynamics with the Lyapunov exponent, and the steady-state
// response of the linear and hardening oscillator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/parallel.hpp"

namespace ckd {

struct ClassicalState {
    double x = 0.0;
    double v = 0.0;
};

// (x', v') for m x'' = -delta m x' - V'(x,t)
inline ClassicalState duffing_derivative(const DuffingParams& p,
                                         const ClassicalState& s, double t) {
    return {s.v, -p.delta * s.v + potential_force(p, s.x, t) / p.mass};
}

inline void rk4_step(const DuffingParams& p, ClassicalState& s, double t, double dt) {
    const ClassicalState k1 = duffing_derivative(p, s, t);
    const ClassicalState k2 =
        duffing_derivative(p, {s.x + 0.5 * dt * k1.x, s.v + 0.5 * dt * k1.v}, t + 0.5 * dt);
    const ClassicalState k3 =
        duffing_derivative(p, {s.x + 0.5 * dt * k2.x, s.v + 0.5 * dt * k2.v}, t + 0.5 * dt);
    const ClassicalState k4 =
        duffing_derivative(p, {s.x + dt * k3.x, s.v + dt * k3.v}, t + dt);
    s.x += (dt / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.v += (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
}

// Tangent dynamics co-integrated with the base trajectory:
//   B'' + delta B' + V''(x(t)) B / m = 0,  B(0) = 1, B'(0) = 0.
// The pair (B, B') is renormalised whenever its norm passes 1e100 and the
// shed logarithm accumulates in log_scale, since log|B| alone reaches
// O(lambda t) ~ 10^2..10^3 over the measurement windows used here.
struct TangentState {
    ClassicalState base;
    double b = 1.0;
    double bdot = 0.0;
    double log_scale = 0.0;
};

inline void tangent_step(const DuffingParams& p, TangentState& s, double t, double dt) {
    struct D4 {
        double x, v, b, bd;
    };
    auto deriv = [&p](const D4& y, double tt) -> D4 {
        return {y.v, -p.delta * y.v + potential_force(p, y.x, tt) / p.mass, y.bd,
                -p.delta * y.bd - potential_curvature(p, y.x) * y.b / p.mass};
    };
    const D4 y0{s.base.x, s.base.v, s.b, s.bdot};
    const D4 k1 = deriv(y0, t);
    const D4 k2 = deriv({y0.x + 0.5 * dt * k1.x, y0.v + 0.5 * dt * k1.v,
                         y0.b + 0.5 * dt * k1.b, y0.bd + 0.5 * dt * k1.bd},
                        t + 0.5 * dt);
    const D4 k3 = deriv({y0.x + 0.5 * dt * k2.x, y0.v + 0.5 * dt * k2.v,
                         y0.b + 0.5 * dt * k2.b, y0.bd + 0.5 * dt * k2.bd},
                        t + 0.5 * dt);
    const D4 k4 = deriv({y0.x + dt * k3.x, y0.v + dt * k3.v, y0.b + dt * k3.b,
                         y0.bd + dt * k3.bd},
                        t + dt);
    s.base.x = y0.x + (dt / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.base.v = y0.v + (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    s.b = y0.b + (dt / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.bdot = y0.bd + (dt / 6.0) * (k1.bd + 2.0 * k2.bd + 2.0 * k3.bd + k4.bd);
    const double n = std::hypot(s.b, s.bdot);
    if (n > 1e100) {
        s.b /= n;
        s.bdot /= n;
        s.log_scale += std::log(n);
    }
}

struct LyapunovEstimate {
    double lambda = 0.0;
    double lambda_first_half = 0.0;
    double lambda_second_half = 0.0;
    bool converged = false;
    double t_transient = 0.0;
    double t_measure = 0.0;
};

// Largest Lyapunov exponent from the tangent norm growth after discarding a
// transient. Non-convergence is flagged when estimates over the two halves
// of the measurement window disagree beyond tol.
inline LyapunovEstimate lyapunov_exponent(const DuffingParams& p, ClassicalState ic,
                                          double t_transient, double t_measure,
                                          double dt, double tol = 0.03) {
    if (t_measure <= 0.0 || dt <= 0.0)
        throw ConfigError("lyapunov: t_measure and dt must be positive");
    double t = 0.0;
    const auto n_trans = static_cast<std::size_t>(std::llround(t_transient / dt));
    for (std::size_t i = 0; i < n_trans; ++i) {
        rk4_step(p, ic, t, dt);
        t += dt;
        if (!std::isfinite(ic.x) || !std::isfinite(ic.v))
            throw NumericalError("lyapunov: trajectory overflow during transient at t=" +
                                 std::to_string(t));
    }
    TangentState ts{ic, 1.0, 0.0, 0.0};
    const auto n_meas = static_cast<std::size_t>(std::llround(t_measure / dt));
    const double t0 = t;
    double log_half = 0.0;
    for (std::size_t i = 0; i < n_meas; ++i) {
        tangent_step(p, ts, t, dt);
        t += dt;
        if (!std::isfinite(ts.base.x) || !std::isfinite(ts.base.v))
            throw NumericalError("lyapunov: trajectory overflow at t=" + std::to_string(t));
        if (i + 1 == n_meas / 2)
            log_half = std::log(std::hypot(ts.b, ts.bdot)) + ts.log_scale;
    }
    const double log_full = std::log(std::hypot(ts.b, ts.bdot)) + ts.log_scale;
    const double span = t - t0;
    LyapunovEstimate est;
    est.t_transient = t_transient;
    est.t_measure = span;
    est.lambda = log_full / span;
    est.lambda_first_half = log_half / (0.5 * span);
    est.lambda_second_half = (log_full - log_half) / (0.5 * span);
    est.converged = std::abs(est.lambda_first_half - est.lambda_second_half) <= tol;
    return est;
}

// Deterministic standard normal pairs via Box-Muller on mt19937_64 draws.
// std::normal_distribution is implementation defined, so it is avoided here
// to keep sampled ensembles reproducible bit for bit across toolchains.
class NormalSampler {
  public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        const double u1 =
            (static_cast<double>((eng_() >> 11) + 1ull)) * 0x1p-53;  // (0, 1]
        const double u2 = (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * pi * u2;
        cached_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    bool have_ = false;
    double cached_ = 0.0;
};

struct ClassicalEnsemble {
    std::vector<ClassicalState> states;
    std::uint64_t seed = 0;
};

// Cloud matched to the Husimi density of the initial packet:
// x ~ N(x0, sqrt(2) sigma), P ~ N(p0, hbar/(sqrt(2) sigma)), v = P/m.
// One Box-Muller pair is consumed per member (x first, then P).
inline ClassicalEnsemble sample_ensemble(const GaussianState& g, const DuffingParams& p,
                                         std::size_t n, std::uint64_t seed) {
    g.validate();
    p.validate();
    NormalSampler ns(seed);
    ClassicalEnsemble e;
    e.seed = seed;
    e.states.reserve(n);
    const double sx = std::sqrt(2.0) * g.sigma;
    const double sp = p.hbar / (std::sqrt(2.0) * g.sigma);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x0 + sx * ns.next();
        const double P = g.p0 + sp * ns.next();
        e.states.push_back({x, P / p.mass});
    }
    return e;
}

struct EnsembleSnapshot {
    double t = 0.0;
    std::vector<double> x;  // NaN marks a trajectory lost to overflow
    std::vector<double> P;  // mechanical momentum m v
};

struct TrajectoryFailure {
    std::size_t index;
    double t;
};

struct EnsembleHistory {
    std::vector<EnsembleSnapshot> snapshots;
    std::vector<TrajectoryFailure> failures;
};

// Integrate every member from t0 through the ascending strobe times, storing
// (x, P) at each. Inside each inter-strobe segment the step is seg/ceil(seg/dt),
// which lands on strobe times exactly. Diverging members are reported and
// carried as NaN from the failure time onwards.
inline EnsembleHistory evolve_ensemble(const DuffingParams& p, const ClassicalEnsemble& ens,
                                       double t0, const std::vector<double>& strobe_times,
                                       double dt, unsigned nthreads = 0) {
    p.validate();
    if (dt <= 0.0) throw ConfigError("ensemble: dt must be positive");
    for (std::size_t i = 0; i + 1 < strobe_times.size(); ++i)
        if (!(strobe_times[i] < strobe_times[i + 1]))
            throw ConfigError("ensemble: strobe times must be ascending");
    if (!strobe_times.empty() && strobe_times.front() < t0)
        throw ConfigError("ensemble: strobe times must not precede t0");

    const std::size_t n = ens.states.size();
    const std::size_t ns = strobe_times.size();
    EnsembleHistory hist;
    hist.snapshots.resize(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        hist.snapshots[s].t = strobe_times[s];
        hist.snapshots[s].x.assign(n, std::numeric_limits<double>::quiet_NaN());
        hist.snapshots[s].P.assign(n, std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<TrajectoryFailure> fails(n, {0, -1.0});

    parallel_for(n, nthreads, [&](std::size_t i) {
        ClassicalState st = ens.states[i];
        double t = t0;
        bool alive = true;
        for (std::size_t s = 0; s < ns && alive; ++s) {
            const double seg = strobe_times[s] - t;
            const auto nst = static_cast<std::size_t>(std::ceil(seg / dt - 1e-12));
            const double h = (nst > 0) ? seg / static_cast<double>(nst) : 0.0;
            for (std::size_t k = 0; k < nst; ++k) {
                rk4_step(p, st, t + static_cast<double>(k) * h, h);
                if (!std::isfinite(st.x) || !std::isfinite(st.v)) {
                    fails[i] = {i, t + static_cast<double>(k + 1) * h};
                    alive = false;
                    break;
                }
            }
            t = strobe_times[s];
            if (alive) {
                hist.snapshots[s].x[i] = st.x;
                hist.snapshots[s].P[i] = p.mass * st.v;
            }
        }
    });
    for (const auto& f : fails)
        if (f.t >= 0.0) hist.failures.push_back(f);
    return hist;
}

// Steady state of the linear (beta = 0) oscillator under periodic forcing:
// x_p = A cos(omega t - phi), A = gamma / sqrt((alpha - omega^2)^2 + (delta omega)^2),
// phi = atan2(delta omega, alpha - omega^2) in [0, pi).
struct SteadyState {
    double amplitude;
    double phase;
};

inline SteadyState harmonic_steady_state(const DuffingParams& p) {
    const double c = p.alpha - p.omega * p.omega;
    const double d = p.delta * p.omega;
    return {p.gamma / std::sqrt(c * c + d * d), std::atan2(d, c)};
}

// Full underdamped solution with matched initial conditions x(0), v(0):
// x(t) = A cos(omega t - phi) + e^{-delta t/2} (C cos(w_d t) + D sin(w_d t)).
struct HarmonicSolution {
    double A, phi, C, D, omega_d, delta, omega;

    double operator()(double t) const {
        const double e = std::exp(-0.5 * delta * t);
        return A * std::cos(omega * t - phi) +
               e * (C * std::cos(omega_d * t) + D * std::sin(omega_d * t));
    }
    double velocity(double t) const {
        const double e = std::exp(-0.5 * delta * t);
        return -A * omega * std::sin(omega * t - phi) +
               e * (-0.5 * delta * (C * std::cos(omega_d * t) + D * std::sin(omega_d * t)) +
                    omega_d * (-C * std::sin(omega_d * t) + D * std::cos(omega_d * t)));
    }
};

inline HarmonicSolution harmonic_solution(const DuffingParams& p, double x0, double v0) {
    const double disc = p.alpha - 0.25 * p.delta * p.delta;
    if (disc <= 0.0)
        throw ConfigError("harmonic_solution: requires underdamped linear oscillator");
    const auto ss = harmonic_steady_state(p);
    const double wd = std::sqrt(disc);
    const double C = x0 - ss.amplitude * std::cos(ss.phase);
    const double D =
        (v0 + 0.5 * p.delta * C - ss.amplitude * p.omega * std::sin(ss.phase)) / wd;
    return {ss.amplitude, ss.phase, C, D, wd, p.delta, p.omega};
}

// Harmonic-balance response branch of the hardening oscillator at drive
// frequency omega. The squared amplitude u = A^2 solves
//   [(alpha + (3/4) beta u - omega^2)^2 + d^2] u = gamma^2
// with d = delta omega by default (this reduces to the linear formula as
// beta -> 0); literal_double_damping selects d = 2 delta omega instead.
struct ResponseBranch {
    double amplitude;
    bool stable;
};

namespace detail {
inline double resp_poly(double u, double a3, double a2, double a1, double a0) {
    return ((a3 * u + a2) * u + a1) * u + a0;
}
inline double resp_poly_d(double u, double a3, double a2, double a1) {
    return (3.0 * a3 * u + 2.0 * a2) * u + a1;
}
}  // namespace detail

inline std::vector<ResponseBranch> frequency_response(const DuffingParams& p, double omega,
                                                      bool literal_double_damping = false) {
    if (!(omega > 0.0)) throw ConfigError("frequency_response: omega must be > 0");
    if (p.gamma == 0.0) return {};
    const double c = p.alpha - omega * omega;
    const double dd = (literal_double_damping ? 2.0 : 1.0) * p.delta * omega;
    const double d2 = dd * dd;
    if (p.beta == 0.0) {
        const double u = p.gamma * p.gamma / (c * c + d2);
        return {{std::sqrt(u), true}};
    }
    // (9/16) b^2 u^3 + (3/2) b c u^2 + (c^2 + d^2) u - gamma^2 = 0
    const double a3 = (9.0 / 16.0) * p.beta * p.beta;
    const double a2 = 1.5 * p.beta * c;
    const double a1 = c * c + d2;
    const double a0 = -p.gamma * p.gamma;

    // depressed cubic y^3 + q y + r, u = y - a2/(3 a3)
    const double b2 = a2 / a3, b1 = a1 / a3, b0 = a0 / a3;
    const double q = b1 - b2 * b2 / 3.0;
    const double r = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0;
    const double shift = -b2 / 3.0;
    std::vector<double> roots;
    const double disc = 0.25 * r * r + q * q * q / 27.0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double t1 = std::cbrt(-0.5 * r + s);
        const double t2 = std::cbrt(-0.5 * r - s);
        roots.push_back(t1 + t2 + shift);
    } else {
        const double m2 = std::sqrt(-q / 3.0);
        const double arg = std::clamp(1.5 * r / (q * m2), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(2.0 * m2 * std::cos(theta - 2.0 * pi * k / 3.0) + shift);
    }
    // Newton polish and filter to distinct positive roots
    std::vector<double> us;
    for (double u : roots) {
        for (int it = 0; it < 60; ++it) {
            const double f = detail::resp_poly(u, a3, a2, a1, a0);
            const double fp = detail::resp_poly_d(u, a3, a2, a1);
            if (fp == 0.0) break;
            const double step = f / fp;
            u -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(u))) break;
        }
        if (!(u > 0.0) || !std::isfinite(u)) continue;
        bool dup = false;
        for (double v : us)
            if (std::abs(u - v) <= 1e-9 * std::max(1.0, std::abs(v))) dup = true;
        if (!dup && std::abs(detail::resp_poly(u, a3, a2, a1, a0)) <
                        1e-10 * std::max(1.0, p.gamma * p.gamma))
            us.push_back(u);
    }
    std::sort(us.begin(), us.end());
    std::vector<ResponseBranch> out;
    for (double u : us)
        out.push_back({std::sqrt(u), detail::resp_poly_d(u, a3, a2, a1) >= 0.0});
    return out;
}

}  // namespace ckd

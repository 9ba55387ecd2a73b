#pragma once

// Orchestration: turns an ExperimentConfig into computed results and, for the
// bundle command, into files on disk. Compute functions are pure so tests can
// call them without touching the filesystem.

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "ckdsim/classical.hpp"
#include "ckdsim/config.hpp"
#include "ckdsim/duffing.hpp"
#include "ckdsim/fft.hpp"
#include "ckdsim/husimi.hpp"
#include "ckdsim/image.hpp"
#include "ckdsim/io.hpp"
#include "ckdsim/otoc.hpp"
#include "ckdsim/propagator.hpp"
#include "ckdsim/wavefunction.hpp"

namespace ckd {

// --- quantum evolution with an observable log -------------------------------

struct ObservableLog {
    std::vector<double> t, norm, mean_x, mean_P, energy, boundary, grad_V;

    std::size_t size() const { return t.size(); }

    void append(const WaveFunction& w, const DuffingParams& pr, Fft& fft) {
        const Observables o = observables(w, pr, fft);
        t.push_back(o.t);
        norm.push_back(o.norm);
        mean_x.push_back(o.mean_x);
        mean_P.push_back(o.mean_P);
        energy.push_back(o.energy);
        boundary.push_back(boundary_mass(w));
        grad_V.push_back(mean_potential_gradient(w, pr));
    }

    Csv to_csv() const {
        Csv csv({"t", "norm", "mean_x", "mean_P", "energy", "boundary_mass", "mean_grad_V"});
        for (std::size_t i = 0; i < t.size(); ++i)
            csv.row({t[i], norm[i], mean_x[i], mean_P[i], energy[i], boundary[i], grad_V[i]});
        return csv;
    }
};

struct QuantumRunResult {
    WaveFunction psi;
    ObservableLog log;
};

inline EvolveOptions evolve_options(const ExperimentConfig& cfg) {
    EvolveOptions o;
    o.dt = cfg.quantum.dt;
    o.boundary_threshold = cfg.quantum.boundary_threshold;
    o.spectral_tail_threshold = cfg.quantum.spectral_tail_threshold;
    o.monitor_stride = cfg.quantum.monitor_stride;
    return o;
}

// Evolves the initial packet for run.cycles drive periods, logging
// observables every run.observable_stride steps (and at both endpoints).
inline QuantumRunResult run_quantum_evolve(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const double t_end = cfg.run.cycles * cfg.params.drive_period();
    QuantumRunResult r;
    r.psi = init_gaussian(cfg.grid, cfg.state, cfg.params);
    Fft fft(cfg.grid.m);
    EvolveOptions opt = evolve_options(cfg);
    opt.checkpoint_stride = cfg.run.observable_stride;
    r.log.append(r.psi, cfg.params, fft);
    evolve(r.psi, cfg.params, t_end, opt, fft,
           [&](const WaveFunction& w) { r.log.append(w, cfg.params, fft); });
    if (r.log.t.back() != r.psi.t) r.log.append(r.psi, cfg.params, fft);
    return r;
}

// --- Ehrenfest residuals -----------------------------------------------------

// For the damped canonical pair the packet means obey
//   d<x>/dt = <P>/m,   d<P>/dt = -delta <P> - <dV/dx>,
// exactly in the continuum. Residuals are measured on the logged samples with
// a five-point centred derivative, so the log must be uniformly spaced.
struct EhrenfestResiduals {
    std::vector<double> t, res_x, res_P;
    double max_res_x = 0.0;
    double max_res_P = 0.0;
};

inline EhrenfestResiduals ehrenfest_residuals(const ObservableLog& log,
                                              const DuffingParams& pr) {
    EhrenfestResiduals r;
    const std::size_t n = log.size();
    if (n < 5) return r;
    const double h = log.t[1] - log.t[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dh = log.t[i + 1] - log.t[i];
        if (std::abs(dh - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw ConfigError("ehrenfest: observable log is not uniformly spaced");
    }
    auto d5 = [&](const std::vector<double>& f, std::size_t i) {
        return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    };
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double rx = d5(log.mean_x, i) - log.mean_P[i] / pr.mass;
        const double rp = d5(log.mean_P, i) + pr.delta * log.mean_P[i] + log.grad_V[i];
        r.t.push_back(log.t[i]);
        r.res_x.push_back(rx);
        r.res_P.push_back(rp);
        r.max_res_x = std::max(r.max_res_x, std::abs(rx));
        r.max_res_P = std::max(r.max_res_P, std::abs(rp));
    }
    return r;
}

inline Csv ehrenfest_to_csv(const EhrenfestResiduals& r) {
    Csv csv({"t", "residual_x", "residual_P"});
    for (std::size_t i = 0; i < r.t.size(); ++i) csv.row({r.t[i], r.res_x[i], r.res_P[i]});
    return csv;
}

// --- OTOC --------------------------------------------------------------------

struct OtocRunResult {
    OtocSeries series;
    QuantumLyapunovFit fit;
};

inline std::vector<double> otoc_sample_times(const ExperimentConfig& cfg) {
    std::vector<double> ts;
    const double dt = cfg.quantum.dt;
    long long prev = -1;
    for (std::size_t k = 0; k < cfg.otoc.samples; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(cfg.otoc.samples - 1);
        const long long steps = std::llround(frac * cfg.otoc.t_max / dt);
        if (steps == prev) continue;
        prev = steps;
        ts.push_back(static_cast<double>(steps) * dt);
    }
    return ts;
}

inline OtocRunResult run_quantum_otoc(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const WaveFunction psi0 = init_gaussian(cfg.grid, cfg.state, cfg.params);
    OtocOptions opt;
    opt.dt = cfg.quantum.dt;
    opt.boundary_threshold = cfg.quantum.boundary_threshold;
    opt.spectral_tail_threshold = cfg.quantum.spectral_tail_threshold;
    opt.monitor_stride = cfg.quantum.monitor_stride;
    opt.nthreads = static_cast<unsigned>(cfg.run.threads);
    OtocRunResult r;
    r.series = otoc_series(psi0, cfg.params, otoc_sample_times(cfg), opt);
    r.fit = fit_quantum_lyapunov(r.series, cfg.otoc.r2_min, cfg.otoc.roll);
    return r;
}

inline Csv otoc_to_csv(const OtocSeries& s) {
    Csv csv({"t", "c", "ln_c"});
    for (const auto& p : s.points)
        csv.row({p.t, p.c, p.c > 0.0 ? std::log(p.c) : std::nan("")});
    return csv;
}

inline Csv otoc_fit_to_csv(const QuantumLyapunovFit& f) {
    Csv csv({"ok", "lambda", "slope", "r2", "t_lo", "t_hi", "n_points"});
    csv.row({f.ok ? 1.0 : 0.0, f.lambda, f.slope, f.r2, f.t_lo, f.t_hi,
             static_cast<double>(f.n_points)});
    return csv;
}

// --- classical ----------------------------------------------------------------

struct PoincareRunResult {
    EnsembleHistory history;          // stroboscopic snapshots; when the run
                                      // length is a non-integer cycle count the
                                      // last snapshot is at the exact end time
    std::vector<double> single_x;     // strobed single trajectory from the
    std::vector<double> single_P;     // packet-centre initial condition
};

inline PoincareRunResult run_classical_poincare(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const double T = cfg.params.drive_period();
    const std::size_t ncyc = static_cast<std::size_t>(std::floor(cfg.run.cycles));
    std::vector<double> strobes(ncyc);
    for (std::size_t k = 0; k < ncyc; ++k) strobes[k] = static_cast<double>(k + 1) * T;

    // the cloud compared against the final Husimi frame must be simultaneous
    // with it, so the ensemble gets one extra snapshot past the section times
    std::vector<double> ens_times = strobes;
    const double t_end = cfg.run.cycles * T;
    if (t_end > (ncyc ? strobes.back() : 0.0) + 1e-9 * T) ens_times.push_back(t_end);

    PoincareRunResult r;
    ClassicalEnsemble ens = sample_ensemble(cfg.state, cfg.params, cfg.ensemble.size,
                                            cfg.ensemble.seed);
    r.history = evolve_ensemble(cfg.params, ens, 0.0, ens_times, cfg.classical.dt,
                                static_cast<unsigned>(cfg.run.threads));

    ClassicalState s{cfg.state.x0, cfg.state.p0 / cfg.params.mass};
    r.single_x.push_back(s.x);
    r.single_P.push_back(cfg.params.mass * s.v);
    double t = 0.0;
    for (std::size_t k = 0; k < ncyc; ++k) {
        const double target = strobes[k];
        const std::size_t nstep =
            static_cast<std::size_t>(std::ceil((target - t) / cfg.classical.dt));
        const double h = (target - t) / static_cast<double>(nstep);
        for (std::size_t i = 0; i < nstep; ++i) {
            rk4_step(cfg.params, s, t, h);
            t += h;
        }
        t = target;
        r.single_x.push_back(s.x);
        r.single_P.push_back(cfg.params.mass * s.v);
    }
    return r;
}

inline Csv ensemble_to_csv(const EnsembleHistory& h) {
    Csv csv({"t", "member", "x", "P"});
    for (const auto& snap : h.snapshots)
        for (std::size_t i = 0; i < snap.x.size(); ++i) {
            if (!std::isfinite(snap.x[i])) continue;
            csv.row({snap.t, static_cast<double>(i), snap.x[i], snap.P[i]});
        }
    return csv;
}

inline LyapunovEstimate run_classical_lyapunov(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const double T = cfg.params.drive_period();
    ClassicalState ic{cfg.state.x0, cfg.state.p0 / cfg.params.mass};
    return lyapunov_exponent(cfg.params, ic, cfg.lyapunov.transient_cycles * T,
                             cfg.lyapunov.measure_cycles * T, cfg.classical.dt,
                             cfg.lyapunov.tolerance);
}

struct FrequencyResponsePoint {
    double omega;
    std::vector<ResponseBranch> branches;
};

inline std::vector<FrequencyResponsePoint> sweep_frequency_response(
    const DuffingParams& pr, double omega_lo, double omega_hi, std::size_t n,
    bool literal_double_damping = false) {
    if (!(omega_hi > omega_lo) || n < 2) throw ConfigError("frequency sweep: bad range");
    std::vector<FrequencyResponsePoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1);
        out[i] = {w, frequency_response(pr, w, literal_double_damping)};
    }
    return out;
}

inline Csv frequency_response_to_csv(const std::vector<FrequencyResponsePoint>& pts) {
    Csv csv({"omega", "branch", "amplitude", "stable"});
    for (const auto& p : pts)
        for (std::size_t b = 0; b < p.branches.size(); ++b)
            csv.row({p.omega, static_cast<double>(b), p.branches[b].amplitude,
                     p.branches[b].stable ? 1.0 : 0.0});
    return csv;
}

// --- phase-space localization --------------------------------------------------

// Fraction of Husimi mass within `radius` of any reference point, evaluated
// on the field's own lattice by rasterizing the disk union. The same
// reference cloud applied to two fields gives a like-for-like localization
// comparison.
inline double localization_fraction(const HusimiField& h,
                                    const std::vector<std::array<double, 2>>& ref,
                                    double radius) {
    if (ref.empty()) throw ConfigError("localization: empty reference cloud");
    if (radius <= 0.0) throw ConfigError("localization: radius must be > 0");
    const std::size_t nx = h.x.size(), np = h.P.size();
    const double hx = nx > 1 ? h.x[1] - h.x[0] : 1.0;
    const double hp = np > 1 ? h.P[1] - h.P[0] : 1.0;
    std::vector<char> mask(nx * np, 0);
    const double r2 = radius * radius;
    for (const auto& p : ref) {
        const auto lo_ix = static_cast<long long>(std::floor((p[0] - radius - h.x[0]) / hx));
        const auto hi_ix = static_cast<long long>(std::ceil((p[0] + radius - h.x[0]) / hx));
        const auto lo_ip = static_cast<long long>(std::floor((p[1] - radius - h.P[0]) / hp));
        const auto hi_ip = static_cast<long long>(std::ceil((p[1] + radius - h.P[0]) / hp));
        for (long long ix = std::max(0LL, lo_ix);
             ix <= std::min(static_cast<long long>(nx) - 1, hi_ix); ++ix) {
            const double dx = h.x[static_cast<std::size_t>(ix)] - p[0];
            for (long long ip = std::max(0LL, lo_ip);
                 ip <= std::min(static_cast<long long>(np) - 1, hi_ip); ++ip) {
                const double dP = h.P[static_cast<std::size_t>(ip)] - p[1];
                if (dx * dx + dP * dP <= r2)
                    mask[static_cast<std::size_t>(ix) * np + static_cast<std::size_t>(ip)] = 1;
            }
        }
    }
    double total = 0.0, covered = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        total += h.q[i];
        if (mask[i]) covered += h.q[i];
    }
    if (total <= 0.0) throw NumericalError("localization: field has no mass");
    return covered / total;
}

inline std::vector<std::array<double, 2>> last_snapshot_cloud(const EnsembleHistory& h) {
    std::vector<std::array<double, 2>> pts;
    if (h.snapshots.empty()) return pts;
    const auto& s = h.snapshots.back();
    for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i])) pts.push_back({s.x[i], s.P[i]});
    return pts;
}

// --- full regime bundle ---------------------------------------------------------

// Writes the complete artefact set for one regime into dir and returns the
// manifest entries (path, sha256, bytes) for everything written.
inline std::vector<ManifestEntry> run_regime(const ExperimentConfig& cfg,
                                             const std::filesystem::path& dir) {
    validate_config(cfg);
    std::filesystem::create_directories(dir);
    std::vector<std::string> rels;
    auto save_text = [&](const std::string& rel, const std::string& text) {
        write_text_file(dir / rel, text);
        rels.push_back(rel);
    };

    // classical ensemble and strobe map
    const PoincareRunResult cls = run_classical_poincare(cfg);
    save_text("ensemble.csv", ensemble_to_csv(cls.history).text());
    {
        Csv csv({"cycle", "x", "P"});
        for (std::size_t k = 0; k < cls.single_x.size(); ++k)
            csv.row({static_cast<double>(k), cls.single_x[k], cls.single_P[k]});
        save_text("strobe_map.csv", csv.text());
    }

    // quantum evolution with observables and Ehrenfest residuals
    const QuantumRunResult q = run_quantum_evolve(cfg);
    save_text("observables.csv", q.log.to_csv().text());
    save_text("ehrenfest.csv", ehrenfest_to_csv(ehrenfest_residuals(q.log, cfg.params)).text());
    write_wavefunction(dir / "psi_final.ckpt", q.psi, cfg.params);
    rels.push_back("psi_final.ckpt");

    // final-time Husimi frame, heatmap, zeros
    const PhaseSpaceWindow win{cfg.husimi.x_lo, cfg.husimi.x_hi, cfg.husimi.P_lo,
                               cfg.husimi.P_hi};
    const HusimiField hf = husimi(q.psi, cfg.params, cfg.husimi.sigma, win, cfg.husimi.nx,
                                  cfg.husimi.np, static_cast<unsigned>(cfg.run.threads));
    {
        Csv csv({"x", "P", "q"});
        for (std::size_t ix = 0; ix < hf.x.size(); ++ix)
            for (std::size_t ip = 0; ip < hf.P.size(); ++ip)
                csv.row({hf.x[ix], hf.P[ip], hf.at(ix, ip)});
        save_text("husimi.csv", csv.text());
    }
    {
        const std::vector<double> ld = log_density(hf);
        double lo = ld[0], hi = ld[0];
        for (const double v : ld) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        Image img = render_heatmap(ld, hf.x.size(), hf.P.size(), lo, hi);
        // classical strobe cloud overlay
        for (const auto& p : last_snapshot_cloud(cls.history)) {
            std::size_t col = 0, row = 0;
            if (phase_point_to_pixel(p[0], p[1], win.x_lo, win.x_hi, win.P_lo, win.P_hi,
                                     hf.x.size(), hf.P.size(), col, row))
                img.set(col, row, 255, 64, 32);
        }
        write_png(dir / "husimi.png", img);
        rels.push_back("husimi.png");
    }
    {
        const std::vector<double> centers =
            linspace(cfg.husimi.x_lo, cfg.husimi.x_hi, cfg.husimi.nx);
        const OverlapField of = coherent_overlap_field(
            q.psi, cfg.params, cfg.husimi.sigma, centers, static_cast<unsigned>(cfg.husimi.pad),
            cfg.husimi.P_lo, cfg.husimi.P_hi, static_cast<unsigned>(cfg.run.threads));
        const auto zeros = find_husimi_zeros(of, cfg.husimi.zero_threshold);
        Csv csv({"x", "P", "winding"});
        for (const auto& z : zeros) csv.row({z.x, z.P, static_cast<double>(z.winding)});
        save_text("husimi_zeros.csv", csv.text());
    }

    // localization of the final Husimi frame against the classical cloud
    {
        const auto cloud = last_snapshot_cloud(cls.history);
        Csv csv({"radius", "fraction"});
        for (const double rad : {0.25, 0.5, 1.0})
            csv.row({rad, cloud.empty() ? std::nan("")
                                        : localization_fraction(hf, cloud, rad)});
        save_text("localization.csv", csv.text());
    }

    // OTOC series and growth-window fit
    const OtocRunResult ot = run_quantum_otoc(cfg);
    save_text("otoc.csv", otoc_to_csv(ot.series).text());
    save_text("otoc_fit.csv", otoc_fit_to_csv(ot.fit).text());

    save_text("config.txt", serialize_config(cfg));

    std::vector<ManifestEntry> entries;
    entries.reserve(rels.size());
    for (const auto& rel : rels) entries.push_back(manifest_entry_for(dir, rel));
    return entries;
}

}  // namespace ckd

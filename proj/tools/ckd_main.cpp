// ckd: command-line front end for the damped Duffing simulation library.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure
// (aliasing/boundary monitors, non-finite state), 3 I/O error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ckdsim/ckdsim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string preset;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--preset", o.preset,
                    "regime preset: harmonic-dissipative, hardening-transient, "
                    "conservative-chaotic, chaotic-dissipative");
    cmd->add_option("--config", o.config_path, "configuration file (key = value lines)");
    cmd->add_option("--set", o.overrides, "override a single key, e.g. --set grid.m=4096");
    cmd->add_option("--out", o.out, "output directory");
}

ckd::ExperimentConfig build_config(const CommonOpts& o) {
    ckd::ExperimentConfig cfg;
    if (!o.preset.empty()) ckd::apply_preset(cfg, o.preset);
    if (!o.config_path.empty())
        ckd::apply_config_text(cfg, ckd::read_text_file(o.config_path));
    for (const auto& kv : o.overrides) ckd::apply_config_override(cfg, kv);
    ckd::validate_config(cfg);
    return cfg;
}

fs::path ensure_out(const CommonOpts& o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ckd::IoError("cannot create output directory " + dir.string());
    return dir;
}

void report(const fs::path& p) { std::printf("wrote %s\n", p.string().c_str()); }

void cmd_classical_poincare(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto r = ckd::run_classical_poincare(cfg);
    ckd::write_text_file(dir / "ensemble.csv", ckd::ensemble_to_csv(r.history).text());
    report(dir / "ensemble.csv");
    ckd::Csv csv({"cycle", "x", "P"});
    for (std::size_t k = 0; k < r.single_x.size(); ++k)
        csv.row({static_cast<double>(k), r.single_x[k], r.single_P[k]});
    csv.save(dir / "strobe_map.csv");
    report(dir / "strobe_map.csv");
    std::printf("ensemble members: %zu, failed: %zu\n", r.history.snapshots.front().x.size(),
                r.history.failures.size());
}

void cmd_classical_lyapunov(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto est = ckd::run_classical_lyapunov(cfg);
    ckd::Csv csv({"lambda", "lambda_first_half", "lambda_second_half", "converged",
                  "t_transient", "t_measure"});
    csv.row({est.lambda, est.lambda_first_half, est.lambda_second_half,
             est.converged ? 1.0 : 0.0, est.t_transient, est.t_measure});
    csv.save(dir / "lyapunov.csv");
    report(dir / "lyapunov.csv");
    std::printf("lambda = %.6f (halves %.6f / %.6f, %s)\n", est.lambda, est.lambda_first_half,
                est.lambda_second_half, est.converged ? "converged" : "not converged");
}

void cmd_classical_freqresponse(const CommonOpts& o, double lo, double hi, std::size_t n,
                                bool literal) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto pts = ckd::sweep_frequency_response(cfg.params, lo, hi, n, literal);
    ckd::frequency_response_to_csv(pts).save(dir / "freqresponse.csv");
    report(dir / "freqresponse.csv");
}

void cmd_quantum_evolve(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto r = ckd::run_quantum_evolve(cfg);
    r.log.to_csv().save(dir / "observables.csv");
    report(dir / "observables.csv");
    ckd::ehrenfest_to_csv(ckd::ehrenfest_residuals(r.log, cfg.params))
        .save(dir / "ehrenfest.csv");
    report(dir / "ehrenfest.csv");
    ckd::write_wavefunction(dir / "psi_final.ckpt", r.psi, cfg.params);
    report(dir / "psi_final.ckpt");
    std::printf("final norm = %.12f at t = %.6f\n", r.log.norm.back(), r.psi.t);
}

void cmd_quantum_husimi(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto r = ckd::run_quantum_evolve(cfg);
    const ckd::PhaseSpaceWindow win{cfg.husimi.x_lo, cfg.husimi.x_hi, cfg.husimi.P_lo,
                                    cfg.husimi.P_hi};
    const auto hf = ckd::husimi(r.psi, cfg.params, cfg.husimi.sigma, win, cfg.husimi.nx,
                                cfg.husimi.np, static_cast<unsigned>(cfg.run.threads));
    {
        ckd::Csv csv({"x", "P", "q"});
        for (std::size_t ix = 0; ix < hf.x.size(); ++ix)
            for (std::size_t ip = 0; ip < hf.P.size(); ++ip)
                csv.row({hf.x[ix], hf.P[ip], hf.at(ix, ip)});
        csv.save(dir / "husimi.csv");
        report(dir / "husimi.csv");
    }
    const auto ld = ckd::log_density(hf);
    double vlo = ld[0], vhi = ld[0];
    for (const double v : ld) {
        vlo = std::min(vlo, v);
        vhi = std::max(vhi, v);
    }
    if (!(vhi > vlo)) vhi = vlo + 1.0;
    ckd::write_png(dir / "husimi.png",
                   ckd::render_heatmap(ld, hf.x.size(), hf.P.size(), vlo, vhi));
    report(dir / "husimi.png");
    const auto centers = ckd::linspace(cfg.husimi.x_lo, cfg.husimi.x_hi, cfg.husimi.nx);
    const auto of = ckd::coherent_overlap_field(
        r.psi, cfg.params, cfg.husimi.sigma, centers, static_cast<unsigned>(cfg.husimi.pad),
        cfg.husimi.P_lo, cfg.husimi.P_hi, static_cast<unsigned>(cfg.run.threads));
    const auto zeros = ckd::find_husimi_zeros(of, cfg.husimi.zero_threshold);
    ckd::Csv csv({"x", "P", "winding"});
    for (const auto& z : zeros) csv.row({z.x, z.P, static_cast<double>(z.winding)});
    csv.save(dir / "husimi_zeros.csv");
    report(dir / "husimi_zeros.csv");
    std::printf("husimi zeros in window: %zu\n", zeros.size());
}

void cmd_quantum_otoc(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto dir = ensure_out(o);
    const auto r = ckd::run_quantum_otoc(cfg);
    ckd::otoc_to_csv(r.series).save(dir / "otoc.csv");
    report(dir / "otoc.csv");
    ckd::otoc_fit_to_csv(r.fit).save(dir / "otoc_fit.csv");
    report(dir / "otoc_fit.csv");
    if (r.fit.ok)
        std::printf("growth window [%.4f, %.4f] (%zu points), lambda_q = %.6f (r2 = %.4f)\n",
                    r.fit.t_lo, r.fit.t_hi, r.fit.n_points, r.fit.lambda, r.fit.r2);
    else
        std::printf("no exponential growth window found\n");
}

void cmd_regime_run(const CommonOpts& o, const std::string& preset) {
    CommonOpts merged = o;
    merged.preset = preset;
    const auto cfg = build_config(merged);
    const auto dir = ensure_out(o);
    const auto entries = ckd::run_regime(cfg, dir);
    json j;
    j["preset"] = preset;
    j["files"] = json::array();
    for (const auto& e : entries)
        j["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    ckd::write_text_file(dir / "manifest.json", j.dump(2) + "\n");
    report(dir / "manifest.json");
    std::printf("regime bundle complete: %zu files\n", entries.size() + 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"damped Duffing oscillator: classical and quantum simulation toolkit"};
    app.require_subcommand(1);
    std::function<void()> action;

    auto* classical = app.add_subcommand("classical", "classical trajectory tools");
    classical->require_subcommand(1);
    auto* quantum = app.add_subcommand("quantum", "split-step quantum evolution tools");
    quantum->require_subcommand(1);
    auto* regime = app.add_subcommand("regime", "full regime artefact bundles");
    regime->require_subcommand(1);

    static CommonOpts o_poin;
    auto* poin = classical->add_subcommand("poincare", "stroboscopic ensemble map");
    add_common(poin, o_poin);
    poin->callback([&] { action = [] { cmd_classical_poincare(o_poin); }; });

    static CommonOpts o_lyap;
    auto* lyap = classical->add_subcommand("lyapunov", "largest Lyapunov exponent");
    add_common(lyap, o_lyap);
    lyap->callback([&] { action = [] { cmd_classical_lyapunov(o_lyap); }; });

    static CommonOpts o_freq;
    static double freq_lo = 0.1, freq_hi = 3.0;
    static std::size_t freq_n = 291;
    static bool freq_literal = false;
    auto* freq = classical->add_subcommand("freqresponse", "harmonic-balance response curve");
    add_common(freq, o_freq);
    freq->add_option("--omega-lo", freq_lo, "sweep start");
    freq->add_option("--omega-hi", freq_hi, "sweep end");
    freq->add_option("--steps", freq_n, "number of sweep points");
    freq->add_flag("--literal-double-damping", freq_literal,
                   "use the 2*delta*omega damping term in the balance equations");
    freq->callback([&] {
        action = [] { cmd_classical_freqresponse(o_freq, freq_lo, freq_hi, freq_n, freq_literal); };
    });

    static CommonOpts o_evolve;
    auto* ev = quantum->add_subcommand("evolve", "wavepacket evolution with observables");
    add_common(ev, o_evolve);
    ev->callback([&] { action = [] { cmd_quantum_evolve(o_evolve); }; });

    static CommonOpts o_hus;
    auto* hus = quantum->add_subcommand("husimi", "final-time Husimi projection and zeros");
    add_common(hus, o_hus);
    hus->callback([&] { action = [] { cmd_quantum_husimi(o_hus); }; });

    static CommonOpts o_otoc;
    auto* ot = quantum->add_subcommand("otoc", "out-of-time-order correlator");
    add_common(ot, o_otoc);
    ot->callback([&] { action = [] { cmd_quantum_otoc(o_otoc); }; });

    static CommonOpts o_regime;
    static std::string regime_preset;
    auto* rr = regime->add_subcommand("run", "compute the full artefact bundle for a preset");
    rr->add_option("name", regime_preset, "regime preset name")->required();
    add_common(rr, o_regime);
    rr->callback([&] { action = [] { cmd_regime_run(o_regime, regime_preset); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (action) action();
    } catch (const ckd::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const ckd::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const ckd::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

#pragma once

// Experiment configuration: a flat dotted-key namespace over nested structs.
// One X-macro table drives the setter, the serializer, and key enumeration so
// the three can never drift apart; a round-trip test pins the format.
// Values serialize as shortest round-trip decimals.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ckdsim/duffing.hpp"
#include "ckdsim/grid.hpp"

namespace ckd {

struct QuantumConfig {
    double dt = pi / 2000.0;  // drive period / 2000 at omega = 2
    double boundary_threshold = 1e-8;
    double spectral_tail_threshold = 1e-8;
    std::size_t monitor_stride = 64;
};

struct ClassicalConfig {
    double dt = pi / 1000.0;
};

struct LyapunovConfig {
    double transient_cycles = 100.0;
    double measure_cycles = 1000.0;
    double tolerance = 0.03;
};

struct EnsembleConfig {
    std::size_t size = 4000;
    std::uint64_t seed = 12345;
};

struct HusimiConfig {
    double sigma = 0.5;
    std::size_t nx = 256;
    std::size_t np = 256;
    double x_lo = -4.0;
    double x_hi = 4.0;
    double P_lo = -5.0;
    double P_hi = 5.0;
    std::size_t pad = 2;
    double zero_threshold = 5e-2;
};

struct OtocConfig {
    double t_max = 10.0 * pi;  // ten drive cycles at omega = 2
    std::size_t samples = 80;
    double r2_min = 0.995;
    std::size_t roll = 10;
};

struct RunConfig {
    double cycles = 13.37;
    std::size_t observable_stride = 10;
    std::size_t threads = 0;  // 0 = all hardware threads
};

struct ExperimentConfig {
    DuffingParams params;          // chaotic-dissipative regime by default
    GaussianState state;
    SpatialGrid grid{-12.0, 12.0, 8192};
    QuantumConfig quantum;
    ClassicalConfig classical;
    LyapunovConfig lyapunov;
    EnsembleConfig ensemble;
    HusimiConfig husimi;
    OtocConfig otoc;
    RunConfig run;
};

// name, member expression, parse/format kind
#define CKD_CONFIG_FIELDS(X)                                            \
    X("system.alpha", params.alpha, Double)                             \
    X("system.beta", params.beta, Double)                               \
    X("system.delta", params.delta, Double)                             \
    X("system.gamma", params.gamma, Double)                             \
    X("system.omega", params.omega, Double)                             \
    X("system.mass", params.mass, Double)                               \
    X("system.hbar", params.hbar, Double)                               \
    X("state.x0", state.x0, Double)                                     \
    X("state.p0", state.p0, Double)                                     \
    X("state.sigma", state.sigma, Double)                               \
    X("grid.x_min", grid.x_min, Double)                                 \
    X("grid.x_max", grid.x_max, Double)                                 \
    X("grid.m", grid.m, Size)                                           \
    X("quantum.dt", quantum.dt, Double)                                 \
    X("quantum.boundary_threshold", quantum.boundary_threshold, Double) \
    X("quantum.spectral_tail_threshold", quantum.spectral_tail_threshold, Double) \
    X("quantum.monitor_stride", quantum.monitor_stride, Size)           \
    X("classical.dt", classical.dt, Double)                             \
    X("lyapunov.transient_cycles", lyapunov.transient_cycles, Double)   \
    X("lyapunov.measure_cycles", lyapunov.measure_cycles, Double)       \
    X("lyapunov.tolerance", lyapunov.tolerance, Double)                 \
    X("ensemble.size", ensemble.size, Size)                             \
    X("ensemble.seed", ensemble.seed, U64)                              \
    X("husimi.sigma", husimi.sigma, Double)                             \
    X("husimi.nx", husimi.nx, Size)                                     \
    X("husimi.np", husimi.np, Size)                                     \
    X("husimi.x_lo", husimi.x_lo, Double)                               \
    X("husimi.x_hi", husimi.x_hi, Double)                               \
    X("husimi.P_lo", husimi.P_lo, Double)                               \
    X("husimi.P_hi", husimi.P_hi, Double)                               \
    X("husimi.pad", husimi.pad, Size)                                   \
    X("husimi.zero_threshold", husimi.zero_threshold, Double)           \
    X("otoc.t_max", otoc.t_max, Double)                                 \
    X("otoc.samples", otoc.samples, Size)                               \
    X("otoc.r2_min", otoc.r2_min, Double)                               \
    X("otoc.roll", otoc.roll, Size)                                     \
    X("run.cycles", run.cycles, Double)                                 \
    X("run.observable_stride", run.observable_stride, Size)             \
    X("run.threads", run.threads, Size)

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline double parse_Double(std::string_view v, std::string_view key) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad numeric value '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline std::size_t parse_Size(std::string_view v, std::string_view key) {
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad integer value '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline std::uint64_t parse_U64(std::string_view v, std::string_view key) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad integer value '" + std::string(v) + "' for " + std::string(key));
    return out;
}

inline std::string format_Double(double v) { return format_double(v); }

inline std::string format_Size(std::size_t v) { return std::to_string(v); }
inline std::string format_U64(std::uint64_t v) { return std::to_string(v); }

}  // namespace detail

inline void set_config_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
#define CKD_X(NAME, MEMBER, KIND)                           \
    if (key == NAME) {                                      \
        cfg.MEMBER = detail::parse_##KIND(value, key);      \
        return;                                             \
    }
    CKD_CONFIG_FIELDS(CKD_X)
#undef CKD_X
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
#define CKD_X(NAME, MEMBER, KIND) keys.emplace_back(NAME);
    CKD_CONFIG_FIELDS(CKD_X)
#undef CKD_X
    return keys;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
#define CKD_X(NAME, MEMBER, KIND) \
    out += NAME;                  \
    out += " = ";                 \
    out += detail::format_##KIND(cfg.MEMBER); \
    out += '\n';
    CKD_CONFIG_FIELDS(CKD_X)
#undef CKD_X
    return out;
}

// Applies `key = value` lines onto cfg. '#' starts a comment; blank lines are
// skipped. Errors carry the 1-based line number.
inline void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        try {
            set_config_key(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

// Accepts a single "key=value" token (command-line override form).
inline void apply_config_override(ExperimentConfig& cfg, std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override must be key=value, got '" + std::string(kv) + "'");
    set_config_key(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
}

// The four reference regimes. All share gamma = 2.5, omega = 2, the window
// [-12, 12], and the standard initial wavepacket; they differ in the linear
// stiffness, the quartic term, damping, and the grid resolution needed to
// hold the damped canonical momentum below the spectral edge for 13.37
// drive cycles.
inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "harmonic-dissipative",
        "hardening-transient",
        "conservative-chaotic",
        "chaotic-dissipative",
    };
    return names;
}

inline void apply_preset(ExperimentConfig& cfg, std::string_view name) {
    cfg = ExperimentConfig{};
    if (name == "harmonic-dissipative") {
        cfg.params.alpha = 1.0;
        cfg.params.beta = 0.0;
        cfg.params.delta = 0.1;
        cfg.grid.m = 2048;
    } else if (name == "hardening-transient") {
        cfg.params.alpha = 1.0;
        cfg.params.beta = 0.25;
        cfg.params.delta = 0.1;
        cfg.grid.m = 8192;
    } else if (name == "conservative-chaotic") {
        cfg.params.alpha = -1.0;
        cfg.params.beta = 0.25;
        cfg.params.delta = 0.0;
        cfg.grid.m = 2048;
    } else if (name == "chaotic-dissipative") {
        cfg.params.alpha = -1.0;
        cfg.params.beta = 0.25;
        cfg.params.delta = 0.1;
        cfg.grid.m = 8192;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) +
                          "' (expected harmonic-dissipative, hardening-transient, "
                          "conservative-chaotic, or chaotic-dissipative)");
    }
}

inline void validate_config(const ExperimentConfig& cfg) {
    cfg.params.validate();
    cfg.state.validate();
    make_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.m);
    if (cfg.quantum.dt <= 0.0) throw ConfigError("quantum.dt must be > 0");
    if (cfg.classical.dt <= 0.0) throw ConfigError("classical.dt must be > 0");
    if (cfg.quantum.boundary_threshold <= 0.0)
        throw ConfigError("quantum.boundary_threshold must be > 0");
    if (cfg.quantum.spectral_tail_threshold <= 0.0)
        throw ConfigError("quantum.spectral_tail_threshold must be > 0");
    if (cfg.quantum.monitor_stride == 0) throw ConfigError("quantum.monitor_stride must be > 0");
    if (cfg.lyapunov.transient_cycles < 0.0 || cfg.lyapunov.measure_cycles <= 0.0)
        throw ConfigError("lyapunov cycle counts must be positive");
    if (cfg.lyapunov.tolerance <= 0.0) throw ConfigError("lyapunov.tolerance must be > 0");
    if (cfg.ensemble.size == 0) throw ConfigError("ensemble.size must be > 0");
    if (cfg.husimi.sigma <= 0.0) throw ConfigError("husimi.sigma must be > 0");
    if (cfg.husimi.nx < 2 || cfg.husimi.np < 2)
        throw ConfigError("husimi resolution must be at least 2x2");
    if (!(cfg.husimi.x_hi > cfg.husimi.x_lo) || !(cfg.husimi.P_hi > cfg.husimi.P_lo))
        throw ConfigError("husimi window is empty");
    if (cfg.husimi.pad == 0 || !is_power_of_two(cfg.husimi.pad))
        throw ConfigError("husimi.pad must be a power of two");
    if (cfg.husimi.zero_threshold <= 0.0) throw ConfigError("husimi.zero_threshold must be > 0");
    if (cfg.otoc.t_max <= 0.0) throw ConfigError("otoc.t_max must be > 0");
    if (cfg.otoc.samples < 2) throw ConfigError("otoc.samples must be >= 2");
    if (cfg.otoc.roll < 3) throw ConfigError("otoc.roll must be >= 3");
    if (cfg.run.cycles <= 0.0) throw ConfigError("run.cycles must be > 0");
    if (cfg.run.observable_stride == 0) throw ConfigError("run.observable_stride must be > 0");
}

}  // namespace ckd

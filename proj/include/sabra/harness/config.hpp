#pragma once

// Flat key = value experiment configuration.
//
// File syntax: one `key = value` per line, `#` starts a comment, blank lines
// are ignored, duplicate keys are an error. `--set key=value` overrides are
// applied after the file. Every key has a default (the reference run) and
// unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sabra/dynamics.hpp"
#include "sabra/error.hpp"
#include "sabra/gibbs_measure.hpp"
#include "sabra/hash.hpp"
#include "sabra/polynomial.hpp"
#include "sabra/sabra.hpp"
#include "sabra/shell_space.hpp"

namespace sabra::harness {

class ConfigError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

inline const std::vector<std::string> &experiment_kinds() {
    static const std::vector<std::string> kinds{"verify-algebra", "sample-measure",        "simulate", "invariance-test",
                                                "tail-decay",     "semigroup-decay",       "inviscid-conservation",
                                                "autocorr"};
    return kinds;
}

struct ConfigKey {
    const char *key;
    const char *default_value;
    const char *description;
};

/// The documented schema. An empty default means "derived" (see description).
inline const std::vector<ConfigKey> &config_schema() {
    static const std::vector<ConfigKey> schema{
        {"experiment", "", "experiment kind; normally taken from the subcommand"},
        {"k0", "1", "base wavenumber, > 0"},
        {"lambda", "2", "shell ratio, > 1"},
        {"shells", "12", "number of shells M, >= 3"},
        {"nu", "1", "viscosity, > 0"},
        {"a", "1", "first Sabra coefficient"},
        {"b", "-1.25", "second Sabra coefficient"},
        {"beta", "", "optional; must equal the value derived from (a, b, lambda) to 1e-12"},
        {"epsilon", "1", "scale of dissipation and noise, >= 0; 0 selects the inviscid equation"},
        {"dt", "1e-4", "time step, > 0"},
        {"t_end", "10", "horizon, >= dt"},
        {"scheme", "expo_em", "ou_exact | expo_em | rk4 | implicit_midpoint"},
        {"stride", "100", "steps between recorded snapshots, >= 1"},
        {"seed", "0", "64-bit master seed; --seed overrides"},
        {"ensemble", "1", "number of independent trajectories, >= 1"},
        {"n_samples", "100000", "Monte Carlo sample count, >= 2"},
        {"n_triples", "10000", "random (u, v, w) triples for verify-algebra, >= 1"},
        {"n_max", "10", "highest shell tested (clamped to shells)"},
        {"m_min", "4", "smallest Galerkin level for tail-decay, >= 3"},
        {"m_max", "", "largest Galerkin level for tail-decay; default shells - 2"},
        {"n_outer", "1000", "outer points for semigroup-decay, >= 2"},
        {"n_inner", "16", "noise paths per outer point for semigroup-decay, >= 2"},
        {"times", "0.1,0.5,1", "comma-separated increasing times for semigroup-decay"},
        {"lags", "0.01,0.1,1", "comma-separated increasing lags for autocorr"},
        {"observables", "x1_1;x1_1*x2_1", "';'-separated products of factors x<n>_<i> or numbers"},
        {"rk4_dt", "0.02", "coarsest step of the rk4 order study (halved twice)"},
        {"rk4_t_end", "1", "horizon of the rk4 order study"},
        {"drift_tolerance", "1e-10", "relative drift allowed for implicit midpoint invariants"},
        {"max_rows", "1000", "rows of sample data written by sample-measure"},
    };
    return schema;
}

/// Parsed observable: display name plus polynomial.
struct Observable {
    std::string name;
    CylindricalPolynomial polynomial;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_real(const std::string &key, const std::string &v) {
    const char *begin = v.c_str();
    char *end = nullptr;
    const double x = std::strtod(begin, &end);
    if (v.empty() || end != begin + v.size() || !std::isfinite(x)) {
        throw ConfigError(key + ": expected a finite real number, got '" + v + "'");
    }
    return x;
}

inline std::uint64_t parse_unsigned(const std::string &key, const std::string &v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
    }
    try {
        return std::stoull(v);
    } catch (const std::out_of_range &) {
        throw ConfigError(key + ": integer out of range '" + v + "'");
    }
}

inline std::vector<double> parse_real_list(const std::string &key, const std::string &v) {
    std::vector<double> out;
    for (const auto &item : split(v, ',')) out.push_back(parse_real(key, item));
    if (out.empty()) {
        throw ConfigError(key + ": expected at least one value");
    }
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (!(out[k] > out[k - 1])) {
            throw ConfigError(key + ": values must be strictly increasing");
        }
    }
    if (out.front() < 0.0) {
        throw ConfigError(key + ": values must be nonnegative");
    }
    return out;
}

inline Observable parse_observable(const std::string &key, const std::string &text, int shells) {
    CylindricalPolynomial p(1.0);
    for (const auto &factor : split(text, '*')) {
        if (!factor.empty() && factor[0] == 'x') {
            const auto parts = split(factor.substr(1), '_');
            if (parts.size() != 2) {
                throw ConfigError(key + ": factor '" + factor + "' must look like x<n>_<i>");
            }
            const auto n = parse_unsigned(key, parts[0]);
            const auto i = parse_unsigned(key, parts[1]);
            if (n < 1 || n > static_cast<std::uint64_t>(shells) || (i != 1 && i != 2)) {
                throw ConfigError(key + ": factor '" + factor + "' names a component outside shells 1.." +
                                  std::to_string(shells));
            }
            p = p * CylindricalPolynomial::shell_component(static_cast<int>(n), static_cast<int>(i));
        } else {
            p = p * parse_real(key, factor);
        }
    }
    if (p.degree() > 6) {
        throw ConfigError(key + ": observable '" + text + "' exceeds degree 6");
    }
    return {text, p};
}

}  // namespace detail

struct ExperimentConfig {
    std::string experiment;
    /// Resolved value of every schema key, in canonical text form.
    std::map<std::string, std::string> values;

    SpectralParams spectral{1.0, 2.0, 12};
    SabraCoefficients coeffs{1.0, -1.25, 2.0};
    MeasureParams measure{1.0, 1.0, SpectralParams(1.0, 2.0, 12)};
    std::vector<double> eigenvalues;  ///< lambda_1..lambda_M
    double epsilon = 1.0;
    double dt = 1e-4;
    double t_end = 10.0;
    Scheme scheme = Scheme::expo_em;
    std::uint64_t stride = 100;
    std::uint64_t seed = 0;
    std::uint64_t ensemble = 1;
    std::uint64_t n_samples = 100000;
    std::uint64_t n_triples = 10000;
    int n_max = 10;
    int m_min = 4;
    int m_max = 10;
    std::uint64_t n_outer = 1000;
    std::uint64_t n_inner = 16;
    std::vector<double> times;
    std::vector<double> lags;
    std::vector<Observable> observables;
    double rk4_dt = 0.02;
    double rk4_t_end = 1.0;
    double drift_tolerance = 1e-10;
    std::uint64_t max_rows = 1000;

    /// Simulation parameters for trajectory `stream`.
    [[nodiscard]] SimConfig sim(std::uint64_t stream = 0) const {
        SimConfig c{dt, t_end, epsilon, coeffs, measure, seed, scheme};
        c.stride = stride;
        c.stream = stream;
        return c;
    }

    /// `key = value` lines in schema order; reloading them reproduces the config.
    [[nodiscard]] std::string canonical() const {
        std::string out;
        for (const auto &key : config_schema()) {
            out += std::string(key.key) + " = " + values.at(key.key) + "\n";
        }
        return out;
    }

    [[nodiscard]] std::string hash() const { return hex64(fnv1a(canonical())); }
};

/// Reads `key = value` lines; errors name the line.
inline std::map<std::string, std::string> parse_flat(std::istream &in, const std::string &origin) {
    std::map<std::string, std::string> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash_pos = line.find('#'); hash_pos != std::string::npos) {
            line.erase(hash_pos);
        }
        const std::string body = detail::trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(body.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
        }
        if (!out.emplace(key, detail::trim(body.substr(eq + 1))).second) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

inline bool noise_dependent(const std::string &experiment) {
    return experiment == "invariance-test" || experiment == "autocorr" || experiment == "semigroup-decay";
}

/// Builds a validated config from raw key/value pairs. `experiment` (if
/// nonempty) must agree with any `experiment` key.
inline ExperimentConfig resolve_config(std::map<std::string, std::string> raw, const std::string &experiment) {
    std::map<std::string, std::string> known;
    for (const auto &key : config_schema()) known[key.key] = key.default_value;
    for (const auto &[key, value] : raw) {
        if (!known.count(key)) {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    if (!experiment.empty()) {
        if (raw.count("experiment") && !raw["experiment"].empty() && raw["experiment"] != experiment) {
            throw ConfigError("experiment: config names '" + raw["experiment"] + "' but the subcommand is '" +
                              experiment + "'");
        }
        raw["experiment"] = experiment;
    }
    for (const auto &[key, value] : raw) known[key] = value;

    ExperimentConfig c;
    c.experiment = known["experiment"];
    bool kind_ok = false;
    for (const auto &k : experiment_kinds()) kind_ok = kind_ok || k == c.experiment;
    if (!kind_ok) {
        throw ConfigError("experiment: unknown experiment kind '" + c.experiment + "'");
    }

    const auto real = [&](const char *key) { return detail::parse_real(key, known[key]); };
    const auto uint = [&](const char *key) { return detail::parse_unsigned(key, known[key]); };
    const auto require = [](bool ok, const std::string &msg) {
        if (!ok) throw ConfigError(msg);
    };

    const double k0 = real("k0");
    const double lambda = real("lambda");
    const auto shells = uint("shells");
    require(k0 > 0.0, "k0: must be positive");
    require(lambda > 1.0, "lambda: must exceed 1");
    require(shells >= 3 && shells <= 200, "shells: must lie in 3..200");
    try {
        c.spectral = SpectralParams(k0, lambda, static_cast<int>(shells));
    } catch (const PreconditionError &e) {
        throw ConfigError(std::string("shells: ") + e.what());
    }
    for (int n = 1; n <= c.spectral.shells(); ++n) c.eigenvalues.push_back(c.spectral.eigenvalue(n));

    const double a = real("a");
    const bool beta_given = !known["beta"].empty();
    const std::optional<double> beta_in = beta_given ? std::optional<double>(real("beta")) : std::nullopt;
    if (beta_in) {
        require(*beta_in > 0.0, "beta: must be positive");
    }
    const double b = real("b");
    require(a + b != 0.0, "a, b: degenerate coefficients, a + b = 0");
    const double ratio = -a / (a + b);
    if (!(ratio > 1.0)) {
        std::ostringstream msg;
        msg << "a, b: no positive β exists (-a/(a+b) = " << ratio << " must exceed 1)";
        throw ConfigError(msg.str());
    }
    const double beta = std::log(ratio) / (2.0 * std::log(lambda));
    if (beta_in && std::abs(*beta_in - beta) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "beta: β mismatch (given " << *beta_in << ", derived " << beta << " from a, b, lambda)";
        throw ConfigError(msg.str());
    }
    c.coeffs = SabraCoefficients(a, b, lambda);

    const double nu = real("nu");
    require(nu > 0.0, "nu: must be positive");
    c.measure = MeasureParams(c.coeffs.beta(), nu, c.spectral);

    c.epsilon = real("epsilon");
    c.dt = real("dt");
    c.t_end = real("t_end");
    require(c.epsilon >= 0.0, "epsilon: must be nonnegative");
    require(c.dt > 0.0, "dt: must be positive");
    require(c.t_end >= c.dt, "t_end: must be at least dt");
    try {
        c.scheme = scheme_from_string(known["scheme"]);
    } catch (const PreconditionError &e) {
        throw ConfigError(std::string("scheme: ") + e.what());
    }
    c.stride = uint("stride");
    require(c.stride >= 1, "stride: must be >= 1");
    c.seed = uint("seed");
    c.ensemble = uint("ensemble");
    require(c.ensemble >= 1, "ensemble: must be >= 1");
    c.n_samples = uint("n_samples");
    require(c.n_samples >= 2, "n_samples: must be >= 2");
    c.n_triples = uint("n_triples");
    require(c.n_triples >= 1, "n_triples: must be >= 1");
    const auto n_max = uint("n_max");
    require(n_max >= 1, "n_max: must be >= 1");
    c.n_max = static_cast<int>(std::min<std::uint64_t>(n_max, shells));
    c.m_min = static_cast<int>(uint("m_min"));
    c.m_max = known["m_max"].empty() ? static_cast<int>(shells) - 2 : static_cast<int>(uint("m_max"));
    c.n_outer = uint("n_outer");
    c.n_inner = uint("n_inner");
    c.times = detail::parse_real_list("times", known["times"]);
    c.lags = detail::parse_real_list("lags", known["lags"]);
    for (const auto &text : detail::split(known["observables"], ';')) {
        c.observables.push_back(detail::parse_observable("observables", text, c.spectral.shells()));
    }
    require(!c.observables.empty(), "observables: expected at least one observable");
    c.rk4_dt = real("rk4_dt");
    c.rk4_t_end = real("rk4_t_end");
    c.drift_tolerance = real("drift_tolerance");
    c.max_rows = uint("max_rows");
    require(c.rk4_dt > 0.0 && c.rk4_t_end >= c.rk4_dt, "rk4_dt: must be positive and at most rk4_t_end");
    require(c.drift_tolerance > 0.0, "drift_tolerance: must be positive");

    // Experiment-specific consistency.
    if (noise_dependent(c.experiment)) {
        require(c.epsilon > 0.0, "epsilon: ε = 0 forbids the noise-dependent experiment '" + c.experiment + "'");
        require(is_stochastic(c.scheme), "scheme: experiment '" + c.experiment + "' needs ou_exact or expo_em");
    }
    if (c.experiment == "simulate") {
        if (c.epsilon == 0.0) {
            require(!is_stochastic(c.scheme), "scheme: epsilon = 0 requires rk4 or implicit_midpoint");
        } else {
            require(is_stochastic(c.scheme), "scheme: epsilon > 0 requires ou_exact or expo_em");
        }
    }
    if (c.experiment == "tail-decay") {
        require(c.m_min >= 3, "m_min: must be >= 3");
        require(c.m_max > c.m_min, "m_max: must exceed m_min");
        require(c.m_max <= c.spectral.shells() - 2, "m_max: must not exceed shells - 2");
    }
    if (c.experiment == "semigroup-decay") {
        require(c.n_outer >= 2, "n_outer: must be >= 2");
        require(c.n_inner >= 2, "n_inner: must be >= 2");
    }

    // Canonical values: derived quantities materialized.
    known["b"] = [&] {
        std::ostringstream os;
        os.precision(17);
        os << b;
        return os.str();
    }();
    known["beta"] = [&] {
        std::ostringstream os;
        os.precision(17);
        os << beta;
        return os.str();
    }();
    known["m_max"] = std::to_string(c.m_max);
    c.values = known;
    return c;
}

/// Loads a config from an optional file plus `key=value` overrides.
inline ExperimentConfig load_config(const std::string &experiment, const std::optional<std::string> &path,
                                    const std::vector<std::string> &overrides = {},
                                    std::optional<std::uint64_t> seed = std::nullopt) {
    std::map<std::string, std::string> raw;
    if (path) {
        std::ifstream in(*path);
        if (!in) {
            throw ConfigError("cannot open config file '" + *path + "'");
        }
        raw = parse_flat(in, *path);
    }
    for (const auto &item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set: expected key=value, got '" + item + "'");
        }
        raw[detail::trim(item.substr(0, eq))] = detail::trim(item.substr(eq + 1));
    }
    if (seed) {
        raw["seed"] = std::to_string(*seed);
    }
    return resolve_config(std::move(raw), experiment);
}

}  // namespace sabra::harness

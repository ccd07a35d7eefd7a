#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sabra/dynamics.hpp"
#include "sabra/gibbs_measure.hpp"
#include "sabra/harness/config.hpp"
#include "sabra/harness/report.hpp"
#include "sabra/parallel.hpp"
#include "sabra/statistics.hpp"

namespace sabra::harness {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    unsigned shards = 1;
};

namespace anchors {
inline constexpr const char *antisymmetry = "trilinear antisymmetry <B(u,v),w> = -<B(u,w),v>";
inline constexpr const char *energy = "energy invariance <B(u,v),v> = 0";
inline constexpr const char *sbeta = "S_beta invariance <B(u,u),A^beta u> = 0 under lambda^(2 beta) = -a/(a+b)";
inline constexpr const char *gaussian = "Gaussian measure mu^{beta,nu} = N(0, nu^-1 A^-beta)";
inline constexpr const char *tail = "Galerkin tail decay of E|B^m - B|^2 for beta > 1/2";
inline constexpr const char *invariance = "invariance of mu^{beta,nu} under the stochastic dynamics";
inline constexpr const char *semigroup = "spectral gap: |P_t phi - mean|^2 <= e^(-lambda_1 t) |phi - mean|^2 in L^2(mu)";
inline constexpr const char *inviscid = "conservation of energy and S_beta by the inviscid equation";
inline constexpr const char *autocorr = "Ornstein-Uhlenbeck mixing: corr(x_n(0), x_n(t)) = e^(-nu eps lambda_n t)";
inline constexpr const char *simulate = "well-posedness of the stochastic dynamics on [0, T]";
}  // namespace anchors

/// Shared state of one run; output writing is single-owner (this thread).
class RunContext {
  public:
    RunContext(const ExperimentConfig &cfg, RunReport &report, RunOutputs &out, unsigned shards)
        : cfg(cfg), report(report), out(out), shards(shards), start_(std::chrono::steady_clock::now()) {}

    [[nodiscard]] double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    void add(CheckRecord c) {
        c.wall_clock = elapsed();
        out.emit(c, report);
        report.checks.push_back(std::move(c));
    }

    const ExperimentConfig &cfg;
    RunReport &report;
    RunOutputs &out;
    unsigned shards;

  private:
    std::chrono::steady_clock::time_point start_;
};

namespace detail {

inline std::string component_name(int n, int i) { return "x_" + std::to_string(n) + "_" + std::to_string(i); }

inline Verdict z_verdict(double z, double effective_samples = kMinEffectiveSamples) {
    if (effective_samples < kMinEffectiveSamples) return Verdict::inconclusive;
    return std::abs(z) <= kZThreshold ? Verdict::pass : Verdict::fail;
}

inline std::string format_time(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

}  // namespace detail

inline void run_verify_algebra(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const auto &p = cfg.spectral;
    const double kM = p.wavenumber(p.shells());
    const double beta = cfg.coeffs.beta();
    const std::size_t chunks = std::min<std::uint64_t>(cfg.n_triples, 64);
    // Per chunk: max normalized residual of each identity.
    std::vector<std::array<double, 3>> worst(chunks, {0.0, 0.0, 0.0});
    parallel_for(chunks, ctx.shards, [&](std::size_t j) {
        const std::uint64_t begin = cfg.n_triples * j / chunks;
        const std::uint64_t end = cfg.n_triples * (j + 1) / chunks;
        NormalStream normals(cfg.seed, j);
        const auto draw = [&] {
            std::vector<double> x(p.dimension());
            normals.fill(x);
            return ShellState(p, std::move(x));
        };
        for (std::uint64_t t = begin; t < end; ++t) {
            const ShellState u = draw();
            const ShellState v = draw();
            const ShellState w = draw();
            const double nu = norm(u), nv = norm(v), nw = norm(w);
            const double anti = std::abs(trilinear_form(u, v, w, cfg.coeffs) + trilinear_form(u, w, v, cfg.coeffs));
            const double energy = std::abs(trilinear_form(u, v, v, cfg.coeffs));
            const auto res = conservation_residuals(u, cfg.coeffs);
            worst[j][0] = std::max(worst[j][0], anti / (kM * nu * nv * nw));
            worst[j][1] = std::max(worst[j][1], energy / (kM * nu * nv * nv));
            worst[j][2] = std::max(worst[j][2], std::abs(res.sbeta) / (std::pow(kM, 1.0 + 2.0 * beta) * nu * nu * nu));
        }
    });
    std::array<double, 3> total{0.0, 0.0, 0.0};
    for (const auto &w : worst) {
        for (int k = 0; k < 3; ++k) total[k] = std::max(total[k], w[k]);
    }
    const char *names[3] = {"antisymmetry residual / (k_M |u| |v| |w|)", "energy residual / (k_M |u| |v|^2)",
                            "S_beta residual / (k_M^(1+2 beta) |u|^3)"};
    const char *anchor_of[3] = {anchors::antisymmetry, anchors::energy, anchors::sbeta};
    for (int k = 0; k < 3; ++k) {
        CheckRecord c;
        c.name = names[k];
        c.anchor = anchor_of[k];
        c.statistic = total[k];
        c.threshold = 1e-10;
        c.verdict = total[k] <= 1e-10 ? Verdict::pass : Verdict::fail;
        c.details = {{"triples", cfg.n_triples}, {"shells", p.shells()}};
        ctx.add(std::move(c));
    }
}

inline void run_sample_measure(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const int n_max = cfg.n_max;
    const auto est = mc_expectation_vector(
        [&](const ShellState &x, std::span<double> out) {
            std::size_t k = 0;
            for (int n = 1; n <= n_max; ++n) {
                for (int i = 1; i <= 2; ++i) {
                    const double v2 = x(n, i) * x(n, i);
                    out[k++] = v2;
                    out[k++] = v2 * v2;
                }
            }
        },
        static_cast<std::size_t>(4 * n_max), cfg.measure, cfg.n_samples, cfg.seed, ctx.shards);

    // The first rows of sampling chunk 0 are exactly the draws used above.
    ctx.out.begin_trajectory(cfg.spectral.shells(), "sample");
    const std::uint64_t rows = std::min<std::uint64_t>(cfg.max_rows, cfg.n_samples / sampling_chunks(cfg.n_samples));
    Sampler draw(cfg.measure, cfg.seed, 0);
    for (std::uint64_t s = 0; s < rows; ++s) ctx.out.trajectory_row(static_cast<double>(s), draw().components());

    std::size_t k = 0;
    for (int n = 1; n <= n_max; ++n) {
        const double var = cfg.measure.shell_variance(n);
        for (int i = 1; i <= 2; ++i) {
            const auto &m2 = est[k++];
            const auto &m4 = est[k++];
            CheckRecord v;
            v.name = "variance " + detail::component_name(n, i);
            v.anchor = anchors::gaussian;
            v.statistic = m2.z_score(var);
            v.threshold = kZThreshold;
            v.verdict = detail::z_verdict(v.statistic);
            v.details = {{"estimate", m2.estimate}, {"expected", var}, {"standard_error", m2.standard_error},
                         {"samples", cfg.n_samples}};
            ctx.add(std::move(v));
            CheckRecord q;
            q.name = "excess kurtosis " + detail::component_name(n, i);
            q.anchor = anchors::gaussian;
            q.statistic = m4.z_score(3.0 * var * var);
            q.threshold = kZThreshold;
            q.verdict = detail::z_verdict(q.statistic);
            q.details = {{"excess_kurtosis", m4.estimate / (var * var) - 3.0},
                         {"fourth_moment", m4.estimate},
                         {"standard_error", m4.standard_error}};
            ctx.add(std::move(q));
        }
    }
}

inline void run_simulate(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const SimConfig sim = cfg.sim(0);
    ctx.out.begin_trajectory(cfg.spectral.shells());
    std::vector<double> energy;
    double last = 0.0;
    simulate_streaming(sim, std::nullopt, [&](double t, std::span<const double> x) {
        ctx.out.trajectory_row(t, x);
        energy.push_back(sabra::detail::squared(x));
        last = t;
        return true;
    });
    CheckRecord c;
    c.name = "trajectory completed";
    c.anchor = anchors::simulate;
    c.statistic = last;
    c.threshold = static_cast<double>(sim.steps() / sim.stride * sim.stride) * sim.dt;
    c.verdict = std::abs(c.statistic - c.threshold) <= 1e-9 * std::max(1.0, c.threshold) ? Verdict::pass : Verdict::fail;
    Moments m;
    for (double e : energy) m.add(e);
    c.details = {{"snapshots", energy.size()}, {"mean_energy", m.mean()}};
    if (is_stochastic(sim.scheme)) {
        double expected = 0.0;
        for (int n = 1; n <= cfg.spectral.shells(); ++n) expected += 2.0 * cfg.measure.shell_variance(n);
        const double tau = integrated_autocorrelation_time(energy);
        c.details["expected_energy"] = expected;
        c.details["effective_samples"] = static_cast<double>(energy.size()) / tau;
    } else {
        c.details["relative_energy_drift"] = std::abs(energy.back() - energy.front()) / energy.front();
    }
    ctx.add(std::move(c));
}

inline void run_invariance_test(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    std::vector<Trajectory> ensemble(cfg.ensemble);
    parallel_for(cfg.ensemble, ctx.shards, [&](std::size_t j) { ensemble[j] = simulate(cfg.sim(j)); });
    ctx.out.begin_trajectory(cfg.spectral.shells());
    for (std::size_t t = 0; t < ensemble[0].size(); ++t) {
        ctx.out.trajectory_row(ensemble[0].times[t], ensemble[0].states[t].components());
    }
    const auto report = invariance_test(ensemble, cfg.measure, cfg.n_max);
    for (const auto &row : report.rows) {
        const std::string comp = detail::component_name(row.shell, row.component);
        CheckRecord v;
        v.name = "stationary variance " + comp;
        v.anchor = anchors::invariance;
        v.statistic = row.variance_z;
        v.threshold = kZThreshold;
        const double ess = row.reliable ? row.effective_samples : 0.0;
        v.verdict = detail::z_verdict(row.variance_z, ess);
        v.details = {{"second_moment", row.second_moment},
                     {"expected", row.expected_variance},
                     {"effective_samples", row.effective_samples},
                     {"autocorrelation_reliable", row.reliable},
                     {"epsilon", cfg.epsilon}};
        ctx.add(std::move(v));
        CheckRecord q;
        q.name = "stationary excess kurtosis " + comp;
        q.anchor = anchors::invariance;
        q.statistic = row.kurtosis_z;
        q.threshold = kZThreshold;
        q.verdict = detail::z_verdict(row.kurtosis_z, ess);
        q.details = {{"excess_kurtosis", row.excess_kurtosis},
                     {"effective_samples", row.effective_samples},
                     {"autocorrelation_reliable", row.reliable}};
        ctx.add(std::move(q));
    }
}

inline void run_tail_decay(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const auto report =
        tail_decay_report(cfg.coeffs, cfg.measure, cfg.m_min, cfg.m_max, cfg.n_samples, cfg.seed, ctx.shards);
    nlohmann::json table = nlohmann::json::array();
    for (const auto &row : report.rows) table.push_back({{"m", row.m}, {"wick", row.wick}});
    CheckRecord rate;
    rate.name = "fitted log-rate per shell";
    rate.anchor = anchors::tail;
    rate.statistic = report.fitted_rate;
    rate.threshold = report.expected_rate;
    rate.verdict = report.rate_within_tolerance ? Verdict::pass : Verdict::fail;
    rate.details = {{"relative_tolerance", 0.05}, {"table", table}, {"beta", cfg.coeffs.beta()}};
    ctx.add(std::move(rate));
    for (const auto &row : report.rows) {
        CheckRecord c;
        c.name = "Monte Carlo vs Wick at m=" + std::to_string(row.m);
        c.anchor = anchors::tail;
        c.statistic = row.z;
        c.threshold = kZThreshold;
        c.verdict = detail::z_verdict(row.z);
        c.details = {{"wick", row.wick},
                     {"monte_carlo", row.monte_carlo.estimate},
                     {"standard_error", row.monte_carlo.standard_error}};
        ctx.add(std::move(c));
    }
}

inline void run_semigroup_decay(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    for (const auto &obs : cfg.observables) {
        const auto report =
            semigroup_decay_check(cfg.sim(), obs.polynomial, cfg.times, cfg.n_outer, cfg.n_inner, ctx.shards);
        for (const auto &row : report.rows) {
            CheckRecord c;
            c.name = "semigroup decay " + obs.name + " t=" + detail::format_time(row.time);
            c.anchor = anchors::semigroup;
            c.statistic = row.lhs;
            c.threshold = row.rhs;
            c.verdict = row.verdict;
            c.details = {{"standard_error", row.lhs_se},
                         {"relative_standard_error", row.lhs != 0.0 ? row.lhs_se / std::abs(row.lhs) : 0.0},
                         {"mean", report.mean},
                         {"variance", report.variance},
                         {"outer", cfg.n_outer},
                         {"inner", cfg.n_inner}};
            ctx.add(std::move(c));
        }
    }
}

/// Energy |u|^2 and S_beta = |A^(beta/2) u|^2.
inline std::pair<double, double> quadratic_invariants(std::span<const double> x, const SpectralParams &p, double beta) {
    double e = 0.0;
    double s = 0.0;
    for (int n = 1; n <= p.shells(); ++n) {
        const double shell = x[component_index(n, 1)] * x[component_index(n, 1)] +
                             x[component_index(n, 2)] * x[component_index(n, 2)];
        e += shell;
        s += std::pow(p.eigenvalue(n), beta) * shell;
    }
    return {e, s};
}

inline void run_inviscid_conservation(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const double beta = cfg.coeffs.beta();
    const ShellState u0 = sample(cfg.measure, cfg.seed, 1);
    const auto [e0, s0] = quadratic_invariants(u0.components(), cfg.spectral, beta);

    SimConfig mid{cfg.dt, cfg.t_end, 0.0, cfg.coeffs, cfg.measure, cfg.seed, Scheme::implicit_midpoint};
    ctx.out.begin_trajectory(cfg.spectral.shells());
    double drift_e = 0.0;
    double drift_s = 0.0;
    std::uint64_t count = 0;
    simulate_streaming(mid, u0, [&](double t, std::span<const double> x) {
        const auto [e, s] = quadratic_invariants(x, cfg.spectral, beta);
        drift_e = std::max(drift_e, std::abs(e - e0) / e0);
        drift_s = std::max(drift_s, std::abs(s - s0) / s0);
        if (count++ % cfg.stride == 0) {
            ctx.out.trajectory_row(t, x);
        }
        return true;
    });
    const auto drift_check = [&](const char *name, double drift) {
        CheckRecord c;
        c.name = name;
        c.anchor = anchors::inviscid;
        c.statistic = drift;
        c.threshold = cfg.drift_tolerance;
        c.verdict = drift <= cfg.drift_tolerance ? Verdict::pass : Verdict::fail;
        c.details = {{"dt", cfg.dt}, {"t_end", cfg.t_end}};
        ctx.add(std::move(c));
    };
    drift_check("implicit midpoint max relative energy drift", drift_e);
    drift_check("implicit midpoint max relative S_beta drift", drift_s);

    // rk4: accumulated per-step change sum_k |I(u_{k+1}) - I(u_k)| / I(u_0) of each
    // invariant over a fixed horizon, at dt, dt/2, dt/4. Each step contributes
    // O(dt^5) without cancellation, so the sum scales as dt^4.
    std::vector<double> dts{cfg.rk4_dt, cfg.rk4_dt / 2.0, cfg.rk4_dt / 4.0};
    std::vector<double> de;
    std::vector<double> ds;
    for (double h : dts) {
        SimConfig rk{h, cfg.rk4_t_end, 0.0, cfg.coeffs, cfg.measure, cfg.seed, Scheme::rk4};
        double prev_e = e0;
        double prev_s = s0;
        double var_e = 0.0;
        double var_s = 0.0;
        simulate_streaming(rk, u0, [&](double, std::span<const double> x) {
            const auto [e, s] = quadratic_invariants(x, cfg.spectral, beta);
            var_e += std::abs(e - prev_e);
            var_s += std::abs(s - prev_s);
            prev_e = e;
            prev_s = s;
            return true;
        });
        de.push_back(var_e / e0);
        ds.push_back(var_s / s0);
    }
    const auto order_check = [&](const char *name, const std::vector<double> &drift) {
        // Least-squares slope of log drift against log dt.
        double xbar = 0.0, ybar = 0.0;
        for (std::size_t k = 0; k < dts.size(); ++k) {
            xbar += std::log(dts[k]) / 3.0;
            ybar += std::log(drift[k]) / 3.0;
        }
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < dts.size(); ++k) {
            sxy += (std::log(dts[k]) - xbar) * (std::log(drift[k]) - ybar);
            sxx += (std::log(dts[k]) - xbar) * (std::log(dts[k]) - xbar);
        }
        CheckRecord c;
        c.name = name;
        c.anchor = anchors::inviscid;
        c.statistic = sxy / sxx;
        c.threshold = 4.0;
        if (drift.back() < 1e-13) {
            c.verdict = Verdict::inconclusive;
            c.details["note"] = "finest drift at rounding level; increase rk4_dt";
        } else {
            c.verdict = std::abs(c.statistic - 4.0) <= 0.5 ? Verdict::pass : Verdict::fail;
        }
        c.details["dt"] = dts;
        c.details["accumulated_relative_drift"] = drift;
        c.details["t_end"] = cfg.rk4_t_end;
        ctx.add(std::move(c));
    };
    order_check("rk4 accumulated energy drift order", de);
    order_check("rk4 accumulated S_beta drift order", ds);
}

inline void run_autocorr(RunContext &ctx) {
    const auto &cfg = ctx.cfg;
    const Trajectory traj = simulate(cfg.sim(0));
    ctx.out.begin_trajectory(cfg.spectral.shells());
    for (std::size_t t = 0; t < traj.size(); ++t) ctx.out.trajectory_row(traj.times[t], traj.states[t].components());
    const bool linear = cfg.scheme == Scheme::ou_exact || (cfg.coeffs.a() == 0.0 && cfg.coeffs.b() == 0.0);
    for (int n = 1; n <= cfg.n_max; ++n) {
        const std::string name = detail::component_name(n, 1);
        AutocorrEstimate est;
        try {
            est = autocorrelation(traj, [n](const ShellState &s) { return s(n, 1); }, name, cfg.lags);
        } catch (const NumericalError &e) {
            CheckRecord c;
            c.name = "autocorrelation " + name;
            c.anchor = anchors::autocorr;
            c.statistic = std::nan("");
            c.threshold = std::nan("");
            c.verdict = Verdict::inconclusive;
            c.details = {{"message", e.what()}};
            ctx.add(std::move(c));
            continue;
        }
        const double rate = cfg.measure.nu * cfg.epsilon * cfg.spectral.eigenvalue(n);
        for (std::size_t k = 0; k < est.lags.size(); ++k) {
            CheckRecord c;
            c.name = "autocorrelation " + name + " tau=" + detail::format_time(est.lags[k]);
            c.anchor = anchors::autocorr;
            c.details = {{"estimate", est.values[k]},
                         {"standard_error", est.standard_errors[k]},
                         {"effective_samples", est.effective_samples}};
            if (linear) {
                const double exact = std::exp(-rate * est.lags[k]);
                c.statistic = std::abs(est.values[k] - exact);
                c.threshold = kZThreshold * est.standard_errors[k] + 1e-12;
                c.verdict = c.statistic <= c.threshold ? Verdict::pass : Verdict::fail;
                c.details["expected"] = exact;
            } else {
                // No closed form for the nonlinear dynamics: recorded, checked only for |rho| <= 1.
                c.statistic = std::abs(est.values[k]);
                c.threshold = 1.0;
                c.verdict = c.statistic <= 1.0 + 1e-12 ? Verdict::pass : Verdict::fail;
                c.details["expected"] = nullptr;
            }
            ctx.add(std::move(c));
        }
    }
}

/// Runs the configured experiment. Errors do not escape: they truncate the
/// outputs and mark the report as failed.
inline RunReport run(const ExperimentConfig &cfg, const RunOptions &options = {}) {
    RunReport report;
    report.experiment = cfg.experiment;
    report.config_hash = cfg.hash();
    report.seed = cfg.seed;
    report.shards = std::max(1u, options.shards);
    RunOutputs out(options.out_dir);
    out.write_config(cfg.canonical());
    RunContext ctx(cfg, report, out, report.shards);
    try {
        const auto &e = cfg.experiment;
        if (e == "verify-algebra") run_verify_algebra(ctx);
        else if (e == "sample-measure") run_sample_measure(ctx);
        else if (e == "simulate") run_simulate(ctx);
        else if (e == "invariance-test") run_invariance_test(ctx);
        else if (e == "tail-decay") run_tail_decay(ctx);
        else if (e == "semigroup-decay") run_semigroup_decay(ctx);
        else if (e == "inviscid-conservation") run_inviscid_conservation(ctx);
        else if (e == "autocorr") run_autocorr(ctx);
        else throw PreconditionError("unknown experiment '" + e + "'");
    } catch (const std::exception &err) {
        report.truncated = true;
        report.error = cfg.experiment + ": " + err.what();
        report.wall_clock = ctx.elapsed();
        out.truncate(report, report.error);
    }
    report.wall_clock = ctx.elapsed();
    out.write_summary(report);
    return report;
}

class ReplayRefused : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ReplayResult {
    RunReport original;
    RunReport replayed;
    bool statistics_compared = false;  ///< true when both runs were single-threaded
    std::vector<std::string> differences;

    [[nodiscard]] bool identical() const { return differences.empty(); }
};

/// Re-runs a recorded experiment from its output directory (config.txt plus
/// report.ndjson) and compares the checks.
inline ReplayResult replay(const std::filesystem::path &run_dir, const RunOptions &options = {}) {
    const auto report_path = std::filesystem::is_directory(run_dir) ? run_dir / "report.ndjson" : run_dir;
    const auto dir = report_path.parent_path();
    ReplayResult result;
    result.original = read_report(report_path);
    if (result.original.version != kVersion) {
        throw ReplayRefused("version mismatch: report was produced by version " + result.original.version +
                            " but this build is " + kVersion + "; replay refused");
    }
    const auto cfg = load_config(result.original.experiment, (dir / "config.txt").string());
    if (cfg.hash() != result.original.config_hash) {
        throw ReplayRefused("config.txt hash " + cfg.hash() + " does not match the report's " +
                            result.original.config_hash + "; replay refused");
    }
    RunOptions opts = options;
    if (!opts.out_dir) {
        opts.out_dir = dir / "replay";
    }
    if (options.shards == 0) {
        opts.shards = result.original.shards;
    }
    result.replayed = run(cfg, opts);
    result.statistics_compared = result.original.shards == 1 && result.replayed.shards == 1;

    const auto &a = result.original.checks;
    const auto &b = result.replayed.checks;
    if (a.size() != b.size()) {
        result.differences.push_back("check count " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        if (a[k].name != b[k].name) {
            result.differences.push_back("check " + std::to_string(k) + ": '" + a[k].name + "' vs '" + b[k].name + "'");
            continue;
        }
        if (a[k].verdict != b[k].verdict) {
            result.differences.push_back(a[k].name + ": verdict " + to_string(a[k].verdict) + " vs " +
                                         to_string(b[k].verdict));
        }
        const bool same = (std::isnan(a[k].statistic) && std::isnan(b[k].statistic)) || a[k].statistic == b[k].statistic;
        if (result.statistics_compared && !same) {
            result.differences.push_back(a[k].name + ": statistic " + format_double(a[k].statistic) + " vs " +
                                         format_double(b[k].statistic));
        }
    }
    if (result.original.truncated != result.replayed.truncated) {
        result.differences.push_back("truncation differs");
    }
    return result;
}

}  // namespace sabra::harness

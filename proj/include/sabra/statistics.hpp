#pragma once

// Estimators for stationary trajectories and ensembles: integrated
// autocorrelation times, the invariance test against mu^{beta,nu}, batched
// autocorrelations, the nested Monte Carlo semigroup decay check and the
// Galerkin tail decay table.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sabra/accumulator.hpp"
#include "sabra/dynamics.hpp"
#include "sabra/error.hpp"
#include "sabra/gibbs_measure.hpp"
#include "sabra/parallel.hpp"
#include "sabra/polynomial.hpp"
#include "sabra/rng.hpp"
#include "sabra/sabra.hpp"

namespace sabra {

enum class Verdict { pass, fail, inconclusive };

inline const char *to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

/// pass < inconclusive < fail
inline Verdict worst(Verdict a, Verdict b) noexcept {
    const auto rank = [](Verdict v) { return v == Verdict::pass ? 0 : (v == Verdict::inconclusive ? 1 : 2); };
    return rank(a) >= rank(b) ? a : b;
}

/// z-score threshold for every statistical verdict.
inline constexpr double kZThreshold = 4.0;
/// Minimum effective sample size before a verdict is issued.
inline constexpr double kMinEffectiveSamples = 30.0;

/// Normalized autocorrelation at integer lag k about the series mean.
inline double autocorrelation_at(std::span<const double> x, std::size_t k, double mean, double variance) {
    if (k >= x.size()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t t = 0; t + k < x.size(); ++t) {
        s += (x[t] - mean) * (x[t + k] - mean);
    }
    return s / (static_cast<double>(x.size() - k) * variance);
}

struct AutocorrelationTime {
    double tau = 1.0;
    std::size_t crossing = 0;  ///< first lag with rho < 0.05 (0 if none within n/2)
    /// The correlation decays within n/50 lags. Otherwise the sample
    /// autocorrelation is biased low and tau cannot be trusted.
    bool reliable = true;
};

inline constexpr std::size_t kMinDecorrelationLags = 50;

/// Integrated autocorrelation time tau = 1 + 2 sum_{k=1}^{W} rho(k), with the
/// window W five times the first lag where rho drops below 0.05. Clamped to
/// at least 1.
inline AutocorrelationTime estimate_autocorrelation_time(std::span<const double> x) {
    const std::size_t n = x.size();
    AutocorrelationTime out;
    if (n < 4) {
        out.reliable = false;
        return out;
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var == 0.0) {
        out.crossing = 1;
        out.reliable = n >= kMinDecorrelationLags;
        return out;
    }
    const std::size_t max_lag = n / 2;
    std::vector<double> rho;
    rho.reserve(64);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        rho.push_back(autocorrelation_at(x, k, mean, var));
        if (rho.back() < 0.05) {
            out.crossing = k;
            break;
        }
    }
    const std::size_t crossing = out.crossing == 0 ? max_lag : out.crossing;
    const std::size_t window = std::min(max_lag, 5 * crossing);
    for (std::size_t k = rho.size() + 1; k <= window; ++k) {
        rho.push_back(autocorrelation_at(x, k, mean, var));
    }
    double tau = 1.0;
    for (std::size_t k = 0; k < window; ++k) tau += 2.0 * rho[k];
    out.tau = std::max(1.0, tau);
    out.reliable = out.crossing != 0 && n >= kMinDecorrelationLags * out.crossing;
    return out;
}

inline double integrated_autocorrelation_time(std::span<const double> x) { return estimate_autocorrelation_time(x).tau; }

struct ComponentInvariance {
    int shell = 0;
    int component = 0;
    double second_moment = 0.0;
    double expected_variance = 0.0;
    double variance_z = 0.0;
    double excess_kurtosis = 0.0;
    double kurtosis_z = 0.0;
    double effective_samples = 0.0;
    bool reliable = true;  ///< autocorrelation time trustworthy for every member
};

struct InvarianceReport {
    std::vector<ComponentInvariance> rows;
    Verdict verdict = Verdict::pass;
    std::string message;
    double max_abs_z = 0.0;
};

/// One scalar series per ensemble member; all members sample the same
/// observable at the same spacing.
using SeriesSet = std::vector<std::vector<double>>;

/// Extracts component (n, i) from every snapshot of every trajectory.
inline SeriesSet component_series(std::span<const Trajectory> ensemble, int n, int i) {
    SeriesSet out;
    for (const auto &traj : ensemble) {
        std::vector<double> s;
        s.reserve(traj.size());
        for (const auto &state : traj.states) s.push_back(state(n, i));
        out.push_back(std::move(s));
    }
    return out;
}

/// Tests E x_{n,i}^2 = 1/(nu lambda_n^beta) and zero excess kurtosis for every
/// component of shells 1..n_max, with standard errors inflated by the
/// integrated autocorrelation time. The overall verdict passes iff every
/// |z| <= 4; an effective sample size below 30 gives "inconclusive".
inline InvarianceReport invariance_test(std::span<const Trajectory> ensemble, const MeasureParams &params, int n_max) {
    detail::require(!ensemble.empty(), "invariance_test: empty ensemble");
    detail::require(n_max >= 1 && n_max <= params.spectral.shells(), "invariance_test: n_max out of range");
    InvarianceReport report;
    for (int n = 1; n <= n_max; ++n) {
        for (int i = 1; i <= 2; ++i) {
            const SeriesSet series = component_series(ensemble, n, i);
            double total = 0.0;
            double sum2 = 0.0;
            double sum4 = 0.0;
            double se2_num = 0.0;
            double ess = 0.0;
            double ess_kurt = 0.0;
            bool reliable = true;
            for (const auto &s : series) {
                const auto len = static_cast<double>(s.size());
                std::vector<double> sq(s.size());
                std::vector<double> quart(s.size());
                Moments m2;
                for (std::size_t t = 0; t < s.size(); ++t) {
                    sq[t] = s[t] * s[t];
                    quart[t] = sq[t] * sq[t];
                    m2.add(sq[t]);
                    sum2 += sq[t];
                    sum4 += quart[t];
                }
                const auto t2 = estimate_autocorrelation_time(sq);
                const auto t4 = estimate_autocorrelation_time(quart);
                const double tau2 = t2.tau;
                const double tau4 = t4.tau;
                reliable = reliable && t2.reliable && t4.reliable;
                // Var of the member mean is Var(x^2) tau / len; members weigh by length.
                se2_num += len * len * m2.variance() * tau2 / len;
                total += len;
                ess += len / tau2;
                ess_kurt += len / std::max(tau2, tau4);
            }
            ComponentInvariance row;
            row.shell = n;
            row.component = i;
            row.second_moment = sum2 / total;
            row.expected_variance = params.shell_variance(n);
            const double se_var = std::sqrt(se2_num) / total;
            row.variance_z = (row.second_moment - row.expected_variance) / se_var;
            row.excess_kurtosis = (sum4 / total) / (row.second_moment * row.second_moment) - 3.0;
            row.kurtosis_z = row.excess_kurtosis / std::sqrt(24.0 / ess_kurt);
            row.effective_samples = ess;
            row.reliable = reliable;
            if (ess < kMinEffectiveSamples || ess_kurt < kMinEffectiveSamples || !reliable) {
                report.verdict = worst(report.verdict, Verdict::inconclusive);
                report.message = !reliable ? "insufficient data: correlation does not decay within 1/50 of the run at shell " +
                                                 std::to_string(n)
                                           : "insufficient data: effective sample size " +
                                                 std::to_string(std::min(ess, ess_kurt)) + " < 30 at shell " +
                                                 std::to_string(n);
            } else {
                const double z = std::max(std::abs(row.variance_z), std::abs(row.kurtosis_z));
                report.max_abs_z = std::max(report.max_abs_z, z);
                if (!(z <= kZThreshold)) {
                    report.verdict = Verdict::fail;
                }
            }
            report.rows.push_back(row);
        }
    }
    if (report.verdict == Verdict::fail) {
        report.message = "some |z| exceeds 4";
    }
    return report;
}

struct AutocorrEstimate {
    std::string observable;
    std::vector<double> lags;
    std::vector<double> values;
    std::vector<double> standard_errors;
    double effective_samples = 0.0;
};

inline constexpr std::size_t kAutocorrBatches = 20;

/// Batched estimate of corr(phi(u(t)), phi(u(t+tau))). Lag pairs are grouped
/// into 20 batches by their start index; the point estimate pools all pairs
/// and the standard error is the spread of the batch estimates.
inline AutocorrEstimate autocorrelation(const Trajectory &traj, const std::function<double(const ShellState &)> &phi,
                                        std::string observable, std::span<const double> lags) {
    const std::size_t n = traj.size();
    detail::require(n >= 2 * kAutocorrBatches, "autocorrelation: trajectory too short");
    const double spacing = traj.spacing();
    const double horizon = traj.times.back() - traj.times.front();
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = phi(traj.states[t]);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    detail::require(var > 0.0, "autocorrelation: observable is constant along the trajectory");

    AutocorrEstimate out;
    out.observable = std::move(observable);
    const auto act = estimate_autocorrelation_time(x);
    out.effective_samples = static_cast<double>(n) / act.tau;
    if (!act.reliable) {
        throw NumericalError("insufficient data: correlation does not decay within 1/50 of the run");
    }
    if (out.effective_samples < kMinEffectiveSamples) {
        throw NumericalError("insufficient data: effective sample size " + std::to_string(out.effective_samples) +
                             " < 30");
    }
    const std::size_t batch_len = n / kAutocorrBatches;
    double previous = -1.0;
    for (double tau : lags) {
        detail::require(tau > previous, "autocorrelation: lags must be strictly increasing");
        previous = tau;
        detail::require(tau >= 0.0 && tau <= horizon / 10.0 + 1e-12, "autocorrelation: lag exceeds horizon/10");
        const auto k = static_cast<std::size_t>(std::llround(tau / spacing));
        detail::require(std::abs(static_cast<double>(k) * spacing - tau) <= 1e-9 * std::max(1.0, tau),
                        "autocorrelation: lag is not a multiple of the snapshot spacing");
        double pooled = 0.0;
        std::size_t pairs = 0;
        Moments batches;
        for (std::size_t b = 0; b < kAutocorrBatches; ++b) {
            const std::size_t begin = b * batch_len;
            const std::size_t end = std::min(b + 1 == kAutocorrBatches ? n : begin + batch_len, n - k);
            if (end <= begin) {
                continue;
            }
            double s = 0.0;
            for (std::size_t t = begin; t < end; ++t) s += (x[t] - mean) * (x[t + k] - mean);
            pooled += s;
            pairs += end - begin;
            batches.add(s / (static_cast<double>(end - begin) * var));
        }
        out.lags.push_back(tau);
        out.values.push_back(pooled / (static_cast<double>(pairs) * var));
        out.standard_errors.push_back(batches.standard_error());
    }
    return out;
}

struct SemigroupDecayRow {
    double time = 0.0;
    double lhs = 0.0;     ///< estimate of int |P_t phi - mean|^2 dmu
    double lhs_se = 0.0;
    double rhs = 0.0;     ///< e^(-lambda_1 t) int |phi - mean|^2 dmu
    Verdict verdict = Verdict::pass;
};

struct SemigroupDecayReport {
    double mean = 0.0;      ///< exact int phi dmu
    double variance = 0.0;  ///< exact int |phi - mean|^2 dmu
    std::vector<SemigroupDecayRow> rows;
    Verdict verdict = Verdict::pass;
};

/// Nested Monte Carlo check of int |P_t phi - phibar|^2 dmu <= e^(-lambda_1 t) int |phi - phibar|^2 dmu.
///
/// Outer points x_j ~ mu are evolved along n_inner independent noise paths.
/// With m_j and s_j^2 the inner mean and variance of phi(u(t; x_j)),
/// (m_j - phibar)^2 - s_j^2 / n_inner is unbiased for (P_t phi(x_j) - phibar)^2.
/// phibar and the phi variance come from the exact Gaussian moments.
/// A time passes when lhs <= rhs (1 + 4 se/lhs); a violation with relative
/// standard error above 0.5 is reported as inconclusive.
///
/// Streams: outer point j is drawn from stream 2^32 + j, inner path r of
/// point j uses noise stream j * n_inner + r.
inline SemigroupDecayReport semigroup_decay_check(const SimConfig &cfg, const CylindricalPolynomial &phi,
                                                  std::span<const double> times, std::size_t n_outer,
                                                  std::size_t n_inner, unsigned shards = 1) {
    detail::require(is_stochastic(cfg.scheme), "semigroup_decay_check: scheme must be stochastic");
    detail::require(n_outer >= 2 && n_inner >= 2, "semigroup_decay_check: need at least 2 outer and 2 inner samples");
    detail::require(!times.empty(), "semigroup_decay_check: no times given");
    std::vector<std::uint64_t> steps;
    for (std::size_t q = 0; q < times.size(); ++q) {
        detail::require(times[q] >= 0.0 && (q == 0 || times[q] > times[q - 1]),
                        "semigroup_decay_check: times must be nonnegative and increasing");
        steps.push_back(static_cast<std::uint64_t>(std::llround(times[q] / cfg.dt)));
    }
    const auto &measure = cfg.measure;
    SemigroupDecayReport report;
    report.mean = gaussian_expectation(phi, measure);
    const CylindricalPolynomial centered = phi - CylindricalPolynomial(report.mean);
    report.variance = gaussian_expectation(centered * centered, measure);
    const double lambda1 = measure.spectral.eigenvalue(1);

    // estimates[j][q]
    std::vector<std::vector<double>> estimates(n_outer, std::vector<double>(times.size()));
    parallel_for(n_outer, shards, [&](std::size_t j) {
        const ShellState x0 = sample(measure, cfg.seed, (std::uint64_t{1} << 32) + j);
        ExpoEulerStepper stepper(cfg.coeffs, measure, cfg.dt, cfg.epsilon, cfg.scheme == Scheme::expo_em);
        std::vector<Moments> inner(times.size());
        std::vector<double> u(x0.data().size());
        std::vector<double> noise(u.size());
        for (std::size_t r = 0; r < n_inner; ++r) {
            std::copy(x0.data().begin(), x0.data().end(), u.begin());
            NormalStream normals(cfg.seed, j * n_inner + r);
            std::uint64_t done = 0;
            for (std::size_t q = 0; q < times.size(); ++q) {
                for (; done < steps[q]; ++done) {
                    normals.fill(noise);
                    stepper.step(u, noise, u);
                }
                inner[q].add(phi.evaluate(u) - report.mean);
            }
        }
        for (std::size_t q = 0; q < times.size(); ++q) {
            const double m = inner[q].mean();
            estimates[j][q] = m * m - inner[q].variance() / static_cast<double>(n_inner);
        }
    });

    for (std::size_t q = 0; q < times.size(); ++q) {
        Moments outer;
        for (std::size_t j = 0; j < n_outer; ++j) outer.add(estimates[j][q]);
        SemigroupDecayRow row;
        row.time = times[q];
        row.lhs = outer.mean();
        row.lhs_se = outer.standard_error();
        row.rhs = std::exp(-lambda1 * times[q]) * report.variance;
        if (row.lhs <= row.rhs) {
            row.verdict = Verdict::pass;
        } else {
            const double rel_se = row.lhs_se / row.lhs;
            if (row.lhs <= row.rhs * (1.0 + kZThreshold * rel_se)) {
                row.verdict = Verdict::pass;
            } else {
                row.verdict = rel_se > 0.5 ? Verdict::inconclusive : Verdict::fail;
            }
        }
        report.verdict = worst(report.verdict, row.verdict);
        report.rows.push_back(row);
    }
    return report;
}

struct TailDecayRow {
    int m = 0;
    double wick = 0.0;
    McEstimate monte_carlo;
    double z = 0.0;
};

struct TailDecayReport {
    std::vector<TailDecayRow> rows;
    double fitted_rate = 0.0;    ///< least-squares slope of log(wick) per shell
    double expected_rate = 0.0;  ///< (2 - 4 beta) log lambda
    bool rate_within_tolerance = false;
    bool monte_carlo_agrees = false;
    Verdict verdict = Verdict::pass;
};

/// Tabulates the exact expected Galerkin tail sum_n E|B^m_n - B_n|^2 over
/// m_min..m_max with a Monte Carlo estimate of each entry, and compares the
/// fitted geometric rate to (2 - 4 beta) log lambda (tolerance 5%).
inline TailDecayReport tail_decay_report(const SabraCoefficients &coeffs, const MeasureParams &params, int m_min,
                                         int m_max, std::uint64_t n_samples, std::uint64_t seed, unsigned shards = 1) {
    detail::require(m_min >= 3 && m_max > m_min, "tail_decay_report: need 3 <= m_min < m_max");
    detail::require(m_max <= params.spectral.shells() - 2, "tail_decay_report: m_max must not exceed M-2");
    const auto count = static_cast<std::size_t>(m_max - m_min + 1);
    std::vector<McEstimate> mc;
    if (n_samples >= 2) {
        mc = mc_expectation_vector(
            [&](const ShellState &x, std::span<double> out) {
                for (int m = m_min; m <= m_max; ++m) {
                    const ShellState d = tail_difference(x, coeffs, m);
                    out[static_cast<std::size_t>(m - m_min)] = inner(d, d);
                }
            },
            count, params, n_samples, seed, shards);
    }
    TailDecayReport report;
    report.expected_rate = (2.0 - 4.0 * params.beta) * std::log(params.spectral.lambda());
    std::vector<double> ms;
    std::vector<double> logs;
    bool agree = true;
    for (int m = m_min; m <= m_max; ++m) {
        TailDecayRow row;
        row.m = m;
        row.wick = expected_tail_norm(coeffs, params, m);
        if (!mc.empty()) {
            row.monte_carlo = mc[static_cast<std::size_t>(m - m_min)];
            row.z = row.monte_carlo.z_score(row.wick);
            agree = agree && std::abs(row.z) <= kZThreshold;
        }
        ms.push_back(m);
        logs.push_back(std::log(row.wick));
        report.rows.push_back(row);
    }
    const double mbar = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    const double lbar = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < ms.size(); ++k) {
        sxy += (ms[k] - mbar) * (logs[k] - lbar);
        sxx += (ms[k] - mbar) * (ms[k] - mbar);
    }
    report.fitted_rate = sxy / sxx;
    report.rate_within_tolerance =
        std::abs(report.fitted_rate - report.expected_rate) <= 0.05 * std::abs(report.expected_rate) + 1e-9;
    report.monte_carlo_agrees = agree;
    report.verdict = report.rate_within_tolerance && agree ? Verdict::pass : Verdict::fail;
    return report;
}

/// Largest H^alpha Holder quotient |u(t+h) - u(t)|_alpha / h^delta over
/// dyadic pairs at scales h = 2^l * spacing, l = 0..levels-1 (finest first).
inline std::vector<double> holder_quotients(const Trajectory &traj, double delta, double alpha, int levels) {
    detail::require(levels >= 1, "holder_quotients: need at least one level");
    const double spacing = traj.spacing();
    std::vector<double> out;
    for (int l = 0; l < levels; ++l) {
        const std::size_t stride = std::size_t{1} << l;
        detail::require(stride < traj.size(), "holder_quotients: trajectory too short for requested levels");
        const double h = spacing * static_cast<double>(stride);
        double best = 0.0;
        for (std::size_t t = 0; t + stride < traj.size(); t += stride) {
            const double d = sobolev_norm(traj.states[t + stride] - traj.states[t], SobolevIndex{alpha});
            best = std::max(best, d / std::pow(h, delta));
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace sabra

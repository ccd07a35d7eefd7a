#pragma once

// The Gaussian measure mu^{beta,nu} = N(0, nu^-1 A^-beta) on the truncated
// shell space: sampling, exact moments, Monte Carlo expectations and the
// Kolmogorov operator of the stochastic Sabra equation acting on
// cylindrical polynomials.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sabra/accumulator.hpp"
#include "sabra/error.hpp"
#include "sabra/parallel.hpp"
#include "sabra/polynomial.hpp"
#include "sabra/rng.hpp"
#include "sabra/sabra.hpp"
#include "sabra/shell_space.hpp"

namespace sabra {

struct MeasureParams {
    double beta;
    double nu;
    SpectralParams spectral;

    MeasureParams(double beta_, double nu_, SpectralParams spectral_) : beta(beta_), nu(nu_), spectral(spectral_) {
        detail::require(std::isfinite(beta) && beta > 0.0, "MeasureParams: beta must be positive");
        detail::require(std::isfinite(nu) && nu > 0.0, "MeasureParams: nu must be positive");
    }

    /// 1 / (nu lambda_n^beta) for any n >= 1, including shells beyond M.
    [[nodiscard]] double shell_variance(int n) const noexcept {
        return 1.0 / (nu * std::pow(spectral.eigenvalue(n), beta));
    }
};

inline double component_variance(const MeasureParams &params, int n) {
    detail::require(n >= 1 && n <= params.spectral.shells(), "component_variance: shell index out of range");
    return params.shell_variance(n);
}

/// Diagonal covariance of mu^{beta,nu} in flat component indices.
inline std::function<double(std::size_t, std::size_t)> measure_covariance(const MeasureParams &params) {
    return [params](std::size_t i, std::size_t j) {
        return i == j ? params.shell_variance(static_cast<int>(i / 2) + 1) : 0.0;
    };
}

/// Exact mu^{beta,nu} expectation of a polynomial.
inline double gaussian_expectation(const CylindricalPolynomial &p, const MeasureParams &params) {
    return wick_expectation(p, measure_covariance(params));
}

/// Draws independent samples x_{n,i} ~ N(0, 1/(nu lambda_n^beta)).
class Sampler {
  public:
    Sampler(const MeasureParams &params, std::uint64_t seed, std::uint64_t stream = 0)
        : params_(params.spectral), stddev_(params.spectral.dimension()), normals_(seed, stream) {
        for (int n = 1; n <= params_.shells(); ++n) {
            const double s = std::sqrt(params.shell_variance(n));
            stddev_[component_index(n, 1)] = s;
            stddev_[component_index(n, 2)] = s;
        }
    }

    void fill(std::span<double> out) {
        for (std::size_t k = 0; k < stddev_.size(); ++k) {
            out[k] = stddev_[k] * normals_();
        }
    }

    ShellState operator()() {
        std::vector<double> x(stddev_.size());
        fill(x);
        return ShellState(params_, std::move(x));
    }

  private:
    SpectralParams params_;
    std::vector<double> stddev_;
    NormalStream normals_;
};

inline ShellState sample(const MeasureParams &params, std::uint64_t seed, std::uint64_t stream = 0) {
    return Sampler(params, seed, stream)();
}

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t samples = 0;

    /// (estimate - reference) / standard_error; zero when both coincide exactly.
    [[nodiscard]] double z_score(double reference) const noexcept {
        const double diff = estimate - reference;
        if (diff == 0.0) {
            return 0.0;
        }
        return diff / standard_error;
    }
};

/// Number of independent sampling chunks. Chunk j draws from stream j, so
/// results are identical for any worker count.
inline std::size_t sampling_chunks(std::uint64_t n_samples) {
    return static_cast<std::size_t>(std::min<std::uint64_t>(n_samples, 64));
}

/// Monte Carlo means of a vector-valued observable. `f(state, out)` writes
/// `dimension` values into out.
template <class F>
std::vector<McEstimate> mc_expectation_vector(F &&f, std::size_t dimension, const MeasureParams &params,
                                              std::uint64_t n_samples, std::uint64_t seed, unsigned shards = 1) {
    detail::require(n_samples >= 2, "mc_expectation: need at least 2 samples");
    const std::size_t chunks = sampling_chunks(n_samples);
    std::vector<MomentAccumulator> partial(chunks, MomentAccumulator(dimension));
    parallel_for(chunks, shards, [&](std::size_t j) {
        const std::uint64_t begin = n_samples * j / chunks;
        const std::uint64_t end = n_samples * (j + 1) / chunks;
        Sampler draw(params, seed, j);
        std::vector<double> values(dimension);
        for (std::uint64_t s = begin; s < end; ++s) {
            const ShellState x = draw();
            f(x, std::span<double>(values));
            for (double v : values) {
                if (!std::isfinite(v)) {
                    throw NumericalError("observable diverged at sample " + std::to_string(s));
                }
            }
            partial[j].add(values);
        }
    });
    MomentAccumulator total(dimension);
    for (const auto &acc : partial) {
        total.merge(acc);
    }
    std::vector<McEstimate> out(dimension);
    for (std::size_t k = 0; k < dimension; ++k) {
        out[k] = {total[k].mean(), total[k].standard_error(), total[k].count()};
    }
    return out;
}

/// Monte Carlo mean and standard error of a scalar observable under mu^{beta,nu}.
template <class F>
McEstimate mc_expectation(F &&f, const MeasureParams &params, std::uint64_t n_samples, std::uint64_t seed,
                          unsigned shards = 1) {
    return mc_expectation_vector([&](const ShellState &x, std::span<double> out) { out[0] = f(x); }, 1, params,
                                 n_samples, seed, shards)
        .front();
}

/// B_{n,i}(x, x) as a polynomial in the shell components, expanded from the
/// same component formulas that evaluate_B uses.
inline CylindricalPolynomial nonlinearity_polynomial(const SabraCoefficients &coeffs, const SpectralParams &spectral,
                                                     int n, int i) {
    detail::require(n >= 1 && n <= spectral.shells() && (i == 1 || i == 2),
                    "nonlinearity_polynomial: index out of range");
    const SabraOperator op(coeffs, spectral);
    const int shells = spectral.shells();
    const auto x = [shells](int m, int c) {
        return (m < 1 || m > shells) ? CylindricalPolynomial{} : CylindricalPolynomial::shell_component(m, c);
    };
    return op.component<CylindricalPolynomial>(n, i, x, x);
}

/// Exact E|B_{n,i}(x,x)|^2 under mu^{beta,nu} for the untruncated B.
///
/// With u = v the two lowest interaction groups of B_{n,i} merge into one
/// with weight (a+b) k_{n-1}. The three groups depend on disjoint shell
/// pairs and every cross product contains some component to an odd power,
/// so only the diagonal terms survive:
///   2 [a^2 k_{n+1}^2 v_{n+1} v_{n+2} + b^2 k_n^2 v_{n-1} v_{n+1}
///      + (a+b)^2 k_{n-1}^2 v_{n-1} v_{n-2}],
/// with v_j the component variance and v_j = 0 for j < 1. The same value
/// holds for both components i. For beta = 1 this is
/// 2/(nu^2 k0^2) lambda^(-2n) [a^2 lambda^-4 + b^2 + (a+b)^2 lambda^4].
inline double expected_B_component_square(const SabraCoefficients &coeffs, const MeasureParams &params, int n,
                                          int i) {
    detail::require(n >= 1, "expected_B_component_square: shell index must be >= 1");
    detail::require(i == 1 || i == 2, "expected_B_component_square: component must be 1 or 2");
    const auto &p = params.spectral;
    const auto var = [&](int j) { return j < 1 ? 0.0 : params.shell_variance(j); };
    const auto k2 = [&](int j) { return p.eigenvalue(j); };
    const double a = coeffs.a();
    const double b = coeffs.b();
    return 2.0 * (a * a * k2(n + 1) * var(n + 1) * var(n + 2) + b * b * k2(n) * var(n - 1) * var(n + 1) +
                  (a + b) * (a + b) * k2(n - 1) * var(n - 1) * var(n - 2));
}

/// Exact sum_n E|B^m_n(x,x) - B_n(x,x)|^2. Only rows m-1 and m contribute:
///   4 a^2 k_m^2 v_m v_{m+1} + 4 a^2 k_{m+1}^2 v_{m+1} v_{m+2} + 4 b^2 k_m^2 v_{m-1} v_{m+1},
/// which scales like k_m^(2 - 4 beta).
inline double expected_tail_norm(const SabraCoefficients &coeffs, const MeasureParams &params, int m) {
    detail::require(m >= 3, "expected_tail_norm: m must be at least 3");
    const auto &p = params.spectral;
    const auto var = [&](int j) { return params.shell_variance(j); };
    const double a2 = coeffs.a() * coeffs.a();
    const double b2 = coeffs.b() * coeffs.b();
    return 4.0 * (a2 * p.eigenvalue(m) * var(m) * var(m + 1) + a2 * p.eigenvalue(m + 1) * var(m + 1) * var(m + 2) +
                  b2 * p.eigenvalue(m) * var(m - 1) * var(m + 1));
}

/// Kolmogorov operator K = Q + L of du + (nu A u + B(u,u)) dt = sqrt(2 A^(1-beta)) dw
/// restricted to one polynomial test function, with its derivatives
/// precomputed symbolically.
///   Q phi = sum_n lambda_n^(1-beta) d^2 phi/dx_n^2 - nu lambda_n x_n d phi/dx_n
///   L phi = - sum_n B_n(x,x) d phi/dx_n
class KolmogorovOperator {
  public:
    KolmogorovOperator(CylindricalPolynomial phi, const SabraCoefficients &coeffs, const MeasureParams &params)
        : phi_(std::move(phi)), op_(coeffs, params.spectral), params_(params) {
        const int shells = params.spectral.shells();
        for (std::size_t var : phi_.variables()) {
            const int n = static_cast<int>(var / 2) + 1;
            detail::require(n <= shells - 2, "KolmogorovOperator: test function depends on shell " +
                                                 std::to_string(n) + " > M-2=" + std::to_string(shells - 2));
            Term t{var, n, phi_.derivative(var), {}, params.spectral.eigenvalue(n)};
            t.second = t.first.derivative(var);
            terms_.push_back(std::move(t));
        }
    }

    [[nodiscard]] const CylindricalPolynomial &test_function() const noexcept { return phi_; }

    /// Q phi(x)
    [[nodiscard]] double symmetric_part(const ShellState &x) const {
        const auto c = x.components();
        double sum = 0.0;
        for (const auto &t : terms_) {
            sum += std::pow(t.eigen, 1.0 - params_.beta) * t.second.evaluate(c) -
                   params_.nu * t.eigen * c[t.var] * t.first.evaluate(c);
        }
        return sum;
    }

    /// L phi(x)
    [[nodiscard]] double nonlinear_part(const ShellState &x) const {
        const auto c = x.components();
        const int shells = x.shells();
        const auto at = [c, shells](int n, int i) { return (n < 1 || n > shells) ? 0.0 : c[component_index(n, i)]; };
        double sum = 0.0;
        for (const auto &t : terms_) {
            const int i = static_cast<int>(t.var % 2) + 1;
            sum -= op_.component<double>(t.shell, i, at, at) * t.first.evaluate(c);
        }
        return sum;
    }

    /// K phi(x) = Q phi(x) + L phi(x)
    [[nodiscard]] double operator()(const ShellState &x) const { return symmetric_part(x) + nonlinear_part(x); }

    /// |A^((1-beta)/2) D phi|^2 (x), the carre du champ integrand.
    [[nodiscard]] double gradient_energy(const ShellState &x) const {
        const auto c = x.components();
        double sum = 0.0;
        for (const auto &t : terms_) {
            const double d = t.first.evaluate(c);
            sum += std::pow(t.eigen, 1.0 - params_.beta) * d * d;
        }
        return sum;
    }

  private:
    struct Term {
        std::size_t var;
        int shell;
        CylindricalPolynomial first;
        CylindricalPolynomial second;
        double eigen;
    };

    CylindricalPolynomial phi_;
    SabraOperator op_;
    MeasureParams params_;
    std::vector<Term> terms_;
};

inline double apply_kolmogorov(const CylindricalPolynomial &phi, const ShellState &x, const SabraCoefficients &coeffs,
                               const MeasureParams &params) {
    detail::require(x.params() == params.spectral, "apply_kolmogorov: state and measure spaces differ");
    return KolmogorovOperator(phi, coeffs, params)(x);
}

}  // namespace sabra

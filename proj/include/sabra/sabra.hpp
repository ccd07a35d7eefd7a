#pragma once

// The Sabra bilinear operator B(u, v) in real two-component form, its
// Galerkin truncation B^m(u, v) = Pi_m B(Pi_m u, Pi_m v), the closed-form
// truncation tail and the quadratic-invariant residuals.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sabra/error.hpp"
#include "sabra/shell_space.hpp"

namespace sabra {

/// Solves lambda^(2 beta) = -a / (a + b) for beta.
inline double beta_from_coefficients(double a, double b, double lambda) {
    detail::require(std::isfinite(a) && std::isfinite(b), "beta_from_coefficients: non-finite coefficients");
    detail::require(lambda > 1.0, "beta_from_coefficients: lambda must exceed 1");
    if (a + b == 0.0) {
        throw PreconditionError("degenerate coefficients: a + b = 0");
    }
    const double ratio = -a / (a + b);
    if (!(ratio > 1.0)) {
        throw PreconditionError("no positive beta exists: -a/(a+b) = " + std::to_string(ratio) + " <= 1");
    }
    return std::log(ratio) / (2.0 * std::log(lambda));
}

class SabraCoefficients {
  public:
    /// Coefficients tied to beta through lambda^(2 beta) = -a/(a+b); throws
    /// when no positive beta exists.
    SabraCoefficients(double a, double b, double lambda)
        : a_(a), b_(b), lambda_(lambda), beta_(beta_from_coefficients(a, b, lambda)), consistent_(true) {}

    /// Arbitrary real (a, b) with an externally imposed beta. B is well
    /// defined for any coefficients; only the S_beta invariance is lost.
    static SabraCoefficients unconstrained(double a, double b, double lambda, double beta) {
        detail::require(std::isfinite(a) && std::isfinite(b), "SabraCoefficients: non-finite coefficients");
        detail::require(lambda > 1.0, "SabraCoefficients: lambda must exceed 1");
        detail::require(std::isfinite(beta) && beta > 0.0, "SabraCoefficients: beta must be positive");
        return SabraCoefficients(a, b, lambda, beta);
    }

    /// Coefficients for which lambda^(2 beta) = -a/(a+b) holds, normalized to a = 1.
    static SabraCoefficients for_beta(double beta, double lambda) {
        const double sum = -std::pow(lambda, -2.0 * beta);
        return SabraCoefficients(1.0, sum - 1.0, lambda);
    }

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] bool satisfies_beta_condition() const noexcept { return consistent_; }

  private:
    SabraCoefficients(double a, double b, double lambda, double beta)
        : a_(a), b_(b), lambda_(lambda), beta_(beta), consistent_(false) {}

    double a_;
    double b_;
    double lambda_;
    double beta_;
    bool consistent_;
};

/// B with the wavenumber table precomputed for one spectral space. The
/// component kernels are templates over the scalar type so the same formulas
/// drive numeric evaluation and symbolic expansion into polynomials.
class SabraOperator {
  public:
    SabraOperator(const SabraCoefficients &coeffs, const SpectralParams &params)
        : a_(coeffs.a()), b_(coeffs.b()), params_(params), k_(static_cast<std::size_t>(params.shells()) + 3) {
        detail::require(std::abs(coeffs.lambda() - params.lambda()) <= 1e-12 * params.lambda(),
                        "SabraOperator: coefficient lambda differs from the spectral lambda");
        for (std::size_t n = 0; n < k_.size(); ++n) {
            k_[n] = params.wavenumber(static_cast<int>(n));
        }
    }

    [[nodiscard]] const SpectralParams &params() const noexcept { return params_; }
    [[nodiscard]] double k(int n) const noexcept { return k_[static_cast<std::size_t>(n)]; }

    /// B_{n,i}(u, v) with the dedicated shell-1 and shell-2 formulas.
    /// `u(n, i)` and `v(n, i)` must return zero outside 1..M.
    template <class T, class U, class V>
    [[nodiscard]] T component(int n, int i, const U &u, const V &v) const {
        if (n == 1) {
            if (i == 1) {
                return a_ * k(2) * (-(u(2, 2) * v(3, 1)) + u(2, 1) * v(3, 2));
            }
            return -a_ * k(2) * (u(2, 1) * v(3, 1) + u(2, 2) * v(3, 2));
        }
        if (n == 2) {
            if (i == 1) {
                return a_ * k(3) * (-(u(3, 2) * v(4, 1)) + u(3, 1) * v(4, 2)) +
                       b_ * k(2) * (-(u(1, 2) * v(3, 1)) + u(1, 1) * v(3, 2));
            }
            return -a_ * k(3) * (u(3, 1) * v(4, 1) + u(3, 2) * v(4, 2)) -
                   b_ * k(2) * (u(1, 1) * v(3, 1) + u(1, 2) * v(3, 2));
        }
        return general_component<T>(n, i, u, v);
    }

    /// The n > 2 formula, applied at any n with zero padding below shell 1.
    template <class T, class U, class V>
    [[nodiscard]] T general_component(int n, int i, const U &u, const V &v) const {
        const double kp = wavenumber_or_zero(n + 1);
        const double kn = wavenumber_or_zero(n);
        const double km = wavenumber_or_zero(n - 1);
        if (i == 1) {
            return a_ * kp * (-(u(n + 1, 2) * v(n + 2, 1)) + u(n + 1, 1) * v(n + 2, 2)) +
                   b_ * kn * (-(u(n - 1, 2) * v(n + 1, 1)) + u(n - 1, 1) * v(n + 1, 2)) +
                   a_ * km * (u(n - 1, 2) * v(n - 2, 1) + u(n - 1, 1) * v(n - 2, 2)) +
                   b_ * km * (u(n - 2, 2) * v(n - 1, 1) + u(n - 2, 1) * v(n - 1, 2));
        }
        return -a_ * kp * (u(n + 1, 1) * v(n + 2, 1) + u(n + 1, 2) * v(n + 2, 2)) -
               b_ * kn * (u(n - 1, 1) * v(n + 1, 1) + u(n - 1, 2) * v(n + 1, 2)) -
               a_ * km * (u(n - 1, 1) * v(n - 2, 1) - u(n - 1, 2) * v(n - 2, 2)) -
               b_ * km * (u(n - 2, 1) * v(n - 1, 1) - u(n - 2, 2) * v(n - 1, 2));
    }

    /// Numeric B(u, v) over flat component arrays of length 2M.
    void apply(std::span<const double> u, std::span<const double> v, std::span<double> out) const {
        const int shells = params_.shells();
        const auto at = [shells](std::span<const double> x) {
            return [x, shells](int n, int i) -> double {
                return (n < 1 || n > shells) ? 0.0 : x[component_index(n, i)];
            };
        };
        const auto uu = at(u);
        const auto vv = at(v);
        for (int n = 1; n <= shells; ++n) {
            out[component_index(n, 1)] = component<double>(n, 1, uu, vv);
            out[component_index(n, 2)] = component<double>(n, 2, uu, vv);
        }
    }

  private:
    [[nodiscard]] double wavenumber_or_zero(int n) const noexcept {
        return (n < 0 || n >= static_cast<int>(k_.size())) ? 0.0 : k_[static_cast<std::size_t>(n)];
    }

    double a_;
    double b_;
    SpectralParams params_;
    std::vector<double> k_;
};

inline ShellState evaluate_B(const ShellState &u, const ShellState &v, const SabraCoefficients &coeffs) {
    require_same_space(u, v, "evaluate_B");
    const SabraOperator op(coeffs, u.params());
    std::vector<double> out(u.params().dimension());
    op.apply(u.components(), v.components(), out);
    return ShellState(u.params(), std::move(out));
}

/// B^m(u, v) = Pi_m B(Pi_m u, Pi_m v).
inline ShellState evaluate_B_galerkin(const ShellState &u, const ShellState &v, const SabraCoefficients &coeffs,
                                      int m) {
    require_same_space(u, v, "evaluate_B_galerkin");
    return project(evaluate_B(project(u, m), project(v, m), coeffs), m);
}

/// B^m(x, x) - Pi_m B(x, x) from its closed form: only rows m-1 and m are
/// nonzero, and they involve shells m-1..m+2 of x.
inline ShellState tail_difference(const ShellState &x, const SabraCoefficients &coeffs, int m) {
    detail::require(m >= 3, "tail_difference: m must be at least 3");
    detail::require(x.shells() >= m + 2, "tail_difference: state needs at least m+2=" + std::to_string(m + 2) +
                                             " shells, has " + std::to_string(x.shells()));
    const auto &p = x.params();
    const double a = coeffs.a();
    const double b = coeffs.b();
    const double km = p.wavenumber(m);
    const double km1 = p.wavenumber(m + 1);

    ShellState out(p);
    out.set(m - 1, 1, -a * km * (x(m, 1) * x(m + 1, 2) - x(m, 2) * x(m + 1, 1)));
    out.set(m - 1, 2, -a * km * (-x(m, 1) * x(m + 1, 1) - x(m, 2) * x(m + 1, 2)));
    out.set(m, 1,
            -a * km1 * (x(m + 1, 1) * x(m + 2, 2) - x(m + 1, 2) * x(m + 2, 1)) -
                b * km * (x(m - 1, 1) * x(m + 1, 2) - x(m - 1, 2) * x(m + 1, 1)));
    out.set(m, 2,
            -a * km1 * (-x(m + 1, 1) * x(m + 2, 1) - x(m + 1, 2) * x(m + 2, 2)) -
                b * km * (-x(m - 1, 1) * x(m + 1, 1) - x(m - 1, 2) * x(m + 1, 2)));
    return out;
}

/// <B(u, v), w>
inline double trilinear_form(const ShellState &u, const ShellState &v, const ShellState &w,
                             const SabraCoefficients &coeffs) {
    require_same_space(u, w, "trilinear_form");
    return inner(evaluate_B(u, v, coeffs), w);
}

struct ConservationResiduals {
    double energy = 0.0;  ///< <B(u,u), u>
    double sbeta = 0.0;   ///< <B(u,u), A^beta u>
};

inline ConservationResiduals conservation_residuals(const ShellState &u, const SabraCoefficients &coeffs) {
    const ShellState buu = evaluate_B(u, u, coeffs);
    return {inner(buu, u), inner(buu, apply_power(u, coeffs.beta()))};
}

}  // namespace sabra

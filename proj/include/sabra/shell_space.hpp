#pragma once

// Spectral state space of the shell model: the diagonal operator A with
// eigenvalues lambda_n = k0^2 * lambda^(2n), its real powers, the Sobolev
// scale H^alpha = D(A^(alpha/2)) and the Galerkin projector onto the first
// m shells. Shell n carries the two real components of the complex mode.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sabra/error.hpp"

namespace sabra {

/// Largest admissible top eigenvalue. At lambda = 2 this allows M <= 26,
/// which keeps lambda_M^beta and k_M^(1+2beta) far inside double range.
inline constexpr double kMaxTopEigenvalue = 1e16;

class SpectralParams {
  public:
    SpectralParams(double k0, double lambda, int shells) : k0_(k0), lambda_(lambda), shells_(shells) {
        detail::require(std::isfinite(k0) && k0 > 0.0, "SpectralParams: k0 must be positive");
        detail::require(std::isfinite(lambda) && lambda > 1.0, "SpectralParams: lambda must exceed 1");
        detail::require(shells >= 3, "SpectralParams: at least 3 shells are required");
        detail::require(eigenvalue(shells) <= kMaxTopEigenvalue,
                        "SpectralParams: truncation M=" + std::to_string(shells) +
                            " exceeds the supported range (lambda_M > 1e16)");
    }

    [[nodiscard]] double k0() const noexcept { return k0_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] int shells() const noexcept { return shells_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return 2 * static_cast<std::size_t>(shells_); }

    /// lambda_n = k0^2 lambda^(2n). Defined for every integer n (shells
    /// outside 1..M are used by closed-form moment formulas).
    [[nodiscard]] double eigenvalue(int n) const noexcept { return k0_ * k0_ * std::pow(lambda_, 2.0 * n); }
    /// k_n = sqrt(lambda_n) = k0 lambda^n.
    [[nodiscard]] double wavenumber(int n) const noexcept { return k0_ * std::pow(lambda_, n); }

    friend bool operator==(const SpectralParams &, const SpectralParams &) = default;

  private:
    double k0_;
    double lambda_;
    int shells_;
};

/// Free-function form of SpectralParams::eigenvalue; requires n >= 1.
inline double eigenvalue(const SpectralParams &params, int n) {
    detail::require(n >= 1, "eigenvalue: shell index must be >= 1");
    return params.eigenvalue(n);
}

/// Flat index of component i (1 or 2) of shell n (1-based).
constexpr std::size_t component_index(int n, int i) noexcept {
    return 2 * static_cast<std::size_t>(n - 1) + static_cast<std::size_t>(i - 1);
}

struct SobolevIndex {
    double alpha = 0.0;

    explicit SobolevIndex(double a) : alpha(a) {
        detail::require(std::isfinite(a), "SobolevIndex: alpha must be finite");
    }
};

/// A Galerkin-truncated velocity configuration (x_{n,1}, x_{n,2}), n = 1..M.
class ShellState {
  public:
    explicit ShellState(SpectralParams params) : params_(params), x_(params.dimension(), 0.0) {}

    ShellState(SpectralParams params, std::vector<double> components)
        : params_(params), x_(std::move(components)) {
        detail::require(x_.size() == params_.dimension(),
                        "ShellState: expected " + std::to_string(params_.dimension()) + " components, got " +
                            std::to_string(x_.size()));
        for (double v : x_) {
            detail::require(std::isfinite(v), "ShellState: components must be finite");
        }
    }

    [[nodiscard]] const SpectralParams &params() const noexcept { return params_; }
    [[nodiscard]] int shells() const noexcept { return params_.shells(); }

    /// Component i of shell n; shells outside 1..M read as zero.
    [[nodiscard]] double operator()(int n, int i) const noexcept {
        if (n < 1 || n > params_.shells()) {
            return 0.0;
        }
        return x_[component_index(n, i)];
    }

    void set(int n, int i, double value) {
        detail::require(n >= 1 && n <= params_.shells() && (i == 1 || i == 2), "ShellState::set: index out of range");
        detail::require(std::isfinite(value), "ShellState::set: value must be finite");
        x_[component_index(n, i)] = value;
    }

    [[nodiscard]] std::span<const double> components() const noexcept { return x_; }
    [[nodiscard]] const std::vector<double> &data() const noexcept { return x_; }

    friend bool operator==(const ShellState &, const ShellState &) = default;

  private:
    SpectralParams params_;
    std::vector<double> x_;
};

inline void require_same_space(const ShellState &u, const ShellState &v, const char *where) {
    detail::require(u.params() == v.params(), std::string(where) + ": states live on different spectral spaces");
}

/// |x_n|^2 = x_{n,1}^2 + x_{n,2}^2.
inline double shell_energy(const ShellState &s, int n) noexcept {
    const double x1 = s(n, 1);
    const double x2 = s(n, 2);
    return x1 * x1 + x2 * x2;
}

/// Plain H inner product.
inline double inner(const ShellState &u, const ShellState &v) {
    require_same_space(u, v, "inner");
    double sum = 0.0;
    const auto a = u.components();
    const auto b = v.components();
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += a[k] * b[k];
    }
    return sum;
}

/// ||x||_alpha = sqrt(sum_n lambda_n^alpha |x_n|^2).
inline double sobolev_norm(const ShellState &s, SobolevIndex idx) {
    const auto &p = s.params();
    double sum = 0.0;
    for (int n = 1; n <= p.shells(); ++n) {
        sum += std::pow(p.eigenvalue(n), idx.alpha) * shell_energy(s, n);
    }
    return std::sqrt(sum);
}

inline double norm(const ShellState &s) { return sobolev_norm(s, SobolevIndex{0.0}); }

/// A^p: scales shell n by lambda_n^p.
inline ShellState apply_power(const ShellState &s, double p) {
    const auto &params = s.params();
    std::vector<double> out(s.data());
    for (int n = 1; n <= params.shells(); ++n) {
        const double f = std::pow(params.eigenvalue(n), p);
        out[component_index(n, 1)] *= f;
        out[component_index(n, 2)] *= f;
    }
    return ShellState(params, std::move(out));
}

/// Pi_m: keeps shells 1..m and zeroes the rest.
inline ShellState project(const ShellState &s, int m) {
    detail::require(m >= 1 && m <= s.shells(),
                    "project: m=" + std::to_string(m) + " outside 1.." + std::to_string(s.shells()));
    std::vector<double> out(s.data());
    for (std::size_t k = 2 * static_cast<std::size_t>(m); k < out.size(); ++k) {
        out[k] = 0.0;
    }
    return ShellState(s.params(), std::move(out));
}

/// alpha * u + v
inline ShellState axpy(double alpha, const ShellState &u, const ShellState &v) {
    require_same_space(u, v, "axpy");
    std::vector<double> out(v.data());
    const auto a = u.components();
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += alpha * a[k];
    }
    return ShellState(v.params(), std::move(out));
}

inline ShellState operator+(const ShellState &u, const ShellState &v) { return axpy(1.0, u, v); }
inline ShellState operator-(const ShellState &u, const ShellState &v) { return axpy(-1.0, v, u); }
inline ShellState operator*(double alpha, const ShellState &u) {
    return axpy(alpha, u, ShellState(u.params()));
}

struct HilbertSchmidtSum {
    double partial_sum = 0.0;
    bool converges = false;
};

/// Partial sum of sum_n lambda_n^(alpha-beta): the Hilbert-Schmidt norm of the
/// embedding H^beta into H^alpha. The series is geometric with ratio
/// lambda^(2(alpha-beta)), so it converges iff alpha < beta.
inline HilbertSchmidtSum hilbert_schmidt_sum(const SpectralParams &params, double alpha, double beta, int terms) {
    detail::require(terms >= 1, "hilbert_schmidt_sum: need at least one term");
    HilbertSchmidtSum out;
    for (int n = 1; n <= terms; ++n) {
        out.partial_sum += std::pow(params.eigenvalue(n), alpha - beta);
    }
    out.converges = alpha < beta;
    return out;
}

}  // namespace sabra

#pragma once

// Cylindrical polynomials over the shell components and exact Gaussian
// moments by Isserlis/Wick pairing enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sabra/error.hpp"
#include "sabra/shell_space.hpp"

namespace sabra {

/// Sorted (component index, exponent) pairs; exponents are positive.
using Monomial = std::vector<std::pair<std::size_t, int>>;

class CylindricalPolynomial {
  public:
    CylindricalPolynomial() = default;
    CylindricalPolynomial(double constant) {  // NOLINT(google-explicit-constructor)
        if (constant != 0.0) {
            terms_[Monomial{}] = constant;
        }
    }

    static CylindricalPolynomial variable(std::size_t component) {
        CylindricalPolynomial p;
        p.terms_[Monomial{{component, 1}}] = 1.0;
        return p;
    }
    /// x_{n,i}
    static CylindricalPolynomial shell_component(int n, int i) {
        detail::require(n >= 1 && (i == 1 || i == 2), "shell_component: index out of range");
        return variable(component_index(n, i));
    }

    /// Adds coefficient * prod x_k^e for the given (component, exponent) list.
    void add_term(double coefficient, Monomial monomial) {
        std::sort(monomial.begin(), monomial.end());
        Monomial merged;
        for (const auto &[var, exp] : monomial) {
            detail::require(exp >= 0, "add_term: negative exponent");
            if (exp == 0) {
                continue;
            }
            if (!merged.empty() && merged.back().first == var) {
                merged.back().second += exp;
            } else {
                merged.emplace_back(var, exp);
            }
        }
        accumulate(std::move(merged), coefficient);
    }

    [[nodiscard]] const std::map<Monomial, double> &terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    [[nodiscard]] int degree() const noexcept {
        int d = 0;
        for (const auto &[mono, c] : terms_) {
            int sum = 0;
            for (const auto &[var, exp] : mono) {
                sum += exp;
            }
            d = std::max(d, sum);
        }
        return d;
    }

    /// Components on which the polynomial depends, ascending.
    [[nodiscard]] std::vector<std::size_t> variables() const {
        std::vector<std::size_t> out;
        for (const auto &[mono, c] : terms_) {
            for (const auto &[var, exp] : mono) {
                out.push_back(var);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    [[nodiscard]] bool depends_on(std::size_t component) const {
        const auto vars = variables();
        return std::binary_search(vars.begin(), vars.end(), component);
    }

    [[nodiscard]] double evaluate(std::span<const double> x) const {
        double sum = 0.0;
        for (const auto &[mono, c] : terms_) {
            double term = c;
            for (const auto &[var, exp] : mono) {
                const double v = x[var];
                for (int e = 0; e < exp; ++e) {
                    term *= v;
                }
            }
            sum += term;
        }
        return sum;
    }
    [[nodiscard]] double operator()(const ShellState &s) const { return evaluate(s.components()); }

    [[nodiscard]] CylindricalPolynomial derivative(std::size_t component) const {
        CylindricalPolynomial out;
        for (const auto &[mono, c] : terms_) {
            auto it = std::find_if(mono.begin(), mono.end(), [&](const auto &p) { return p.first == component; });
            if (it == mono.end()) {
                continue;
            }
            Monomial reduced = mono;
            auto &entry = reduced[static_cast<std::size_t>(it - mono.begin())];
            const double factor = c * entry.second;
            if (--entry.second == 0) {
                reduced.erase(reduced.begin() + (it - mono.begin()));
            }
            out.accumulate(std::move(reduced), factor);
        }
        return out;
    }

    CylindricalPolynomial &operator+=(const CylindricalPolynomial &o) {
        for (const auto &[mono, c] : o.terms_) {
            accumulate(mono, c);
        }
        return *this;
    }
    CylindricalPolynomial &operator-=(const CylindricalPolynomial &o) {
        for (const auto &[mono, c] : o.terms_) {
            accumulate(mono, -c);
        }
        return *this;
    }
    CylindricalPolynomial &operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto &[mono, c] : terms_) {
            c *= s;
        }
        return *this;
    }

    friend CylindricalPolynomial operator+(CylindricalPolynomial a, const CylindricalPolynomial &b) { return a += b; }
    friend CylindricalPolynomial operator-(CylindricalPolynomial a, const CylindricalPolynomial &b) { return a -= b; }
    friend CylindricalPolynomial operator-(CylindricalPolynomial a) { return a *= -1.0; }
    friend CylindricalPolynomial operator*(double s, CylindricalPolynomial a) { return a *= s; }
    friend CylindricalPolynomial operator*(CylindricalPolynomial a, double s) { return a *= s; }

    friend CylindricalPolynomial operator*(const CylindricalPolynomial &a, const CylindricalPolynomial &b) {
        CylindricalPolynomial out;
        for (const auto &[ma, ca] : a.terms_) {
            for (const auto &[mb, cb] : b.terms_) {
                Monomial m = ma;
                m.insert(m.end(), mb.begin(), mb.end());
                out.add_term(ca * cb, std::move(m));
            }
        }
        return out;
    }

  private:
    void accumulate(Monomial mono, double c) {
        if (c == 0.0) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(std::move(mono), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) {
                terms_.erase(it);
            }
        }
    }

    std::map<Monomial, double> terms_;
};

namespace detail {

inline double sum_over_pairings(std::vector<std::size_t> &factors,
                                const std::function<double(std::size_t, std::size_t)> &covariance) {
    if (factors.empty()) {
        return 1.0;
    }
    if (factors.size() % 2 != 0) {
        return 0.0;
    }
    const std::size_t first = factors.front();
    double total = 0.0;
    for (std::size_t j = 1; j < factors.size(); ++j) {
        const double c = covariance(first, factors[j]);
        if (c == 0.0) {
            continue;
        }
        std::vector<std::size_t> rest;
        rest.reserve(factors.size() - 2);
        for (std::size_t k = 1; k < factors.size(); ++k) {
            if (k != j) {
                rest.push_back(factors[k]);
            }
        }
        total += c * sum_over_pairings(rest, covariance);
    }
    return total;
}

}  // namespace detail

/// E[prod of factors] for a centered Gaussian vector with the given
/// covariance, summing over all perfect pairings (Isserlis' theorem).
inline double wick_monomial_expectation(const Monomial &monomial,
                                        const std::function<double(std::size_t, std::size_t)> &covariance) {
    std::vector<std::size_t> factors;
    for (const auto &[var, exp] : monomial) {
        factors.insert(factors.end(), static_cast<std::size_t>(exp), var);
    }
    detail::require(factors.size() <= 12, "wick_monomial_expectation: degree above 12 is not supported");
    return detail::sum_over_pairings(factors, covariance);
}

inline double wick_expectation(const CylindricalPolynomial &p,
                               const std::function<double(std::size_t, std::size_t)> &covariance) {
    double sum = 0.0;
    for (const auto &[mono, c] : p.terms()) {
        sum += c * wick_monomial_expectation(mono, covariance);
    }
    return sum;
}

}  // namespace sabra

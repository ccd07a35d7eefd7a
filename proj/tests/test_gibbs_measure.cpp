#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sabra/gibbs_measure.hpp"
#include "test_support.hpp"

using namespace sabra;
using sabra::test::reference_coefficients;
using sabra::test::reference_space;

namespace {

CylindricalPolynomial x(int n, int i) { return CylindricalPolynomial::shell_component(n, i); }

MeasureParams reference_measure(int shells, double beta = 1.0, double nu = 1.0) {
    return MeasureParams(beta, nu, reference_space(shells));
}

// Test-side oracle: E|B_{n,i}(x,x)|^2 by squaring the symbolic expansion of
// B_{n,i} and summing Wick pairings. M must be at least n + 2 so that the
// truncated polynomial equals the full one.
double wick_B_square(const SabraCoefficients &c, const MeasureParams &m, int n, int i) {
    const auto b = nonlinearity_polynomial(c, m.spectral, n, i);
    return gaussian_expectation(b * b, m);
}

// Q phi and L phi as explicit polynomials, for exact integration.
CylindricalPolynomial generator_polynomial(const CylindricalPolynomial &phi, const SabraCoefficients &c,
                                           const MeasureParams &m, bool symmetric, bool nonlinear) {
    CylindricalPolynomial out;
    for (std::size_t var : phi.variables()) {
        const int n = static_cast<int>(var / 2) + 1;
        const int i = static_cast<int>(var % 2) + 1;
        const double lam = m.spectral.eigenvalue(n);
        const auto d = phi.derivative(var);
        if (symmetric) {
            out += std::pow(lam, 1.0 - m.beta) * d.derivative(var);
            out -= m.nu * lam * (CylindricalPolynomial::variable(var) * d);
        }
        if (nonlinear) {
            out -= nonlinearity_polynomial(c, m.spectral, n, i) * d;
        }
    }
    return out;
}

std::vector<CylindricalPolynomial> small_battery() {
    return {
        x(1, 1),
        x(2, 2) * x(2, 2),
        x(1, 1) * x(2, 1),
        x(1, 1) * x(2, 1) * x(3, 2),
        x(1, 2) * x(1, 2) * x(1, 2) - 2.0 * x(3, 1),
        x(2, 1) * x(3, 1) + x(1, 1) * x(1, 2) * x(2, 2),
    };
}

}  // namespace

TEST(MeasureParams, RejectsInvalid) {
    EXPECT_THROW(MeasureParams(0.0, 1.0, reference_space(4)), PreconditionError);
    EXPECT_THROW(MeasureParams(1.0, -1.0, reference_space(4)), PreconditionError);
}

TEST(ComponentVariance, Examples) {
    EXPECT_DOUBLE_EQ(component_variance(reference_measure(5), 1), 0.25);
    EXPECT_DOUBLE_EQ(component_variance(reference_measure(5), 2), 1.0 / 16.0);
    EXPECT_NEAR(component_variance(reference_measure(5, 0.75, 2.0), 1), std::pow(4.0, -0.75) / 2.0, 1e-16);
    const auto m = reference_measure(10, 0.6, 1.3);
    for (int n = 1; n < 10; ++n) {
        EXPECT_NEAR(component_variance(m, n + 1) / component_variance(m, n), std::pow(2.0, -2 * 0.6), 1e-14);
    }
    EXPECT_THROW((void)component_variance(m, 11), PreconditionError);
}

TEST(Sample, DeterministicGivenSeedAndStream) {
    const auto m = reference_measure(6);
    EXPECT_EQ(sample(m, 42), sample(m, 42));
    EXPECT_NE(sample(m, 42), sample(m, 43));
    EXPECT_NE(sample(m, 42, 0), sample(m, 42, 1));
}

TEST(Sample, VarianceAndKurtosisPerComponent) {
    const auto m = reference_measure(12);
    MomentAccumulator acc(m.spectral.dimension());
    Sampler draw(m, 5);
    const int n_samples = 200000;
    for (int s = 0; s < n_samples; ++s) acc.add(draw().components());
    for (int n = 1; n <= 10; ++n) {
        for (int i = 1; i <= 2; ++i) {
            const auto &mom = acc[component_index(n, i)];
            const double var = component_variance(m, n);
            const double se = var * std::sqrt(2.0 / n_samples);
            EXPECT_LE(std::abs(mom.variance() - var), 4.0 * se) << "n=" << n;
            EXPECT_LE(std::abs(mom.excess_kurtosis()), 4.0 * std::sqrt(24.0 / n_samples)) << "n=" << n;
        }
    }
}

TEST(McExpectation, ConstantAndSecondMoment) {
    const auto m = reference_measure(6);
    const auto one = mc_expectation([](const ShellState &) { return 1.0; }, m, 1000, 1);
    EXPECT_EQ(one.estimate, 1.0);
    EXPECT_EQ(one.standard_error, 0.0);
    for (int n = 1; n <= 4; ++n) {
        const auto e = mc_expectation([n](const ShellState &s) { return s(n, 1) * s(n, 1); }, m, 50000, 2);
        EXPECT_LE(std::abs(e.z_score(component_variance(m, n))), 4.0);
    }
    EXPECT_THROW((void)mc_expectation([](const ShellState &) { return 1.0; }, m, 1, 1), PreconditionError);
}

TEST(McExpectation, DivergedObservableNamesSample) {
    const auto m = reference_measure(4);
    try {
        (void)mc_expectation(
            [](const ShellState &s) { return s(1, 1) > 0.5 ? std::numeric_limits<double>::infinity() : 0.0; }, m,
            1000, 3);
        FAIL() << "expected an error";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("observable diverged at sample"), std::string::npos);
    }
}

TEST(McExpectation, ShardCountDoesNotChangeResult) {
    const auto m = reference_measure(8);
    const auto f = [](const ShellState &s) { return s(2, 1) * s(3, 2) + s(1, 1) * s(1, 1); };
    const auto one = mc_expectation(f, m, 20000, 9, 1);
    const auto four = mc_expectation(f, m, 20000, 9, 4);
    EXPECT_EQ(one.estimate, four.estimate);
    EXPECT_EQ(one.standard_error, four.standard_error);
}

TEST(NonlinearityPolynomial, MatchesNumericB) {
    sabra::test::StateGenerator gen(40);
    const auto c = reference_coefficients();
    const auto p = reference_space(8);
    for (int n = 1; n <= 8; ++n) {
        for (int i = 1; i <= 2; ++i) {
            const auto poly = nonlinearity_polynomial(c, p, n, i);
            for (int t = 0; t < 5; ++t) {
                const auto s = gen(p);
                EXPECT_NEAR(poly(s), evaluate_B(s, s, c)(n, i), 1e-11 * p.wavenumber(8));
            }
        }
    }
}

// B_n(x,x) never involves shell n itself, which is why the nonlinear part of
// the generator integrates to zero against the product Gaussian.
TEST(NonlinearityPolynomial, ContainsNoMonomialInOwnShell) {
    for (const auto &c : {reference_coefficients(), SabraCoefficients::unconstrained(0.3, 2.0, 1.5, 1.0)}) {
        const SpectralParams p(1.0, c.lambda(), 12);
        for (int n = 1; n <= 12; ++n) {
            for (int i = 1; i <= 2; ++i) {
                const auto poly = nonlinearity_polynomial(c, p, n, i);
                EXPECT_FALSE(poly.depends_on(component_index(n, 1))) << n;
                EXPECT_FALSE(poly.depends_on(component_index(n, 2))) << n;
                EXPECT_LE(poly.degree(), 2);
            }
        }
    }
}

TEST(ExpectedBComponentSquare, MatchesWickOracle) {
    for (const double beta : {0.6, 0.75, 1.0, 1.3}) {
        const auto c = SabraCoefficients::for_beta(beta, 2.0);
        for (const double nu : {0.5, 1.0, 3.0}) {
            const MeasureParams m(beta, nu, SpectralParams(0.7, 2.0, 12));
            for (int n = 1; n <= 10; ++n) {
                for (int i = 1; i <= 2; ++i) {
                    const double oracle = wick_B_square(c, m, n, i);
                    EXPECT_NEAR(expected_B_component_square(c, m, n, i), oracle, 1e-12 * oracle)
                        << "beta=" << beta << " n=" << n << " i=" << i;
                }
            }
        }
    }
}

TEST(ExpectedBComponentSquare, FrozenValues) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(10);
    // 2 * 2^-8 * (1/16 + 25/16 + 1) from the Wick oracle.
    EXPECT_NEAR(expected_B_component_square(c, m, 4, 1), 0.0205078125, 1e-16);
    EXPECT_NEAR(wick_B_square(c, m, 4, 1), 0.0205078125, 1e-15);

    // beta = 1 closed form with prefactor 2 / (nu^2 k0^2).
    const double lambda = 2.0;
    for (int n = 3; n <= 8; ++n) {
        const double closed = 2.0 * std::pow(lambda, -2.0 * n) *
                              (1.0 / std::pow(lambda, 4) + c.b() * c.b() + std::pow(1.0 + c.b(), 2) * std::pow(lambda, 4));
        EXPECT_NEAR(expected_B_component_square(c, m, n, 2), closed, 1e-14 * closed);
    }

    // a = 0 drops the first group entirely.
    const auto b_only = SabraCoefficients::unconstrained(0.0, 1.7, 2.0, 1.0);
    const MeasureParams m2(1.0, 2.0, SpectralParams(1.5, 2.0, 10));
    for (int n = 3; n <= 6; ++n) {
        EXPECT_NEAR(expected_B_component_square(b_only, m2, n, 1), wick_B_square(b_only, m2, n, 1),
                    1e-12 * wick_B_square(b_only, m2, n, 1));
    }
}

// The printed constant 4/(nu^2 k0^2) in the integrability estimate is an
// upper bound; the exact Wick value is half of it.
TEST(ExpectedBComponentSquare, PrintedConstantIsAnUpperBoundByFactorTwo) {
    const auto c = reference_coefficients();
    const MeasureParams m(1.0, 1.7, SpectralParams(1.3, 2.0, 10));
    const double lambda = 2.0;
    for (int n = 3; n <= 8; ++n) {
        const double bracket = c.a() * c.a() * std::pow(lambda, -4) + c.b() * c.b() +
                               std::pow(c.a() + c.b(), 2) * std::pow(lambda, 4);
        const double printed = 4.0 / (m.nu * m.nu * 1.3 * 1.3) * bracket * std::pow(lambda, -2.0 * n);
        EXPECT_NEAR(expected_B_component_square(c, m, n, 1) / printed, 0.5, 1e-14);
    }
}

TEST(ExpectedBComponentSquare, MonteCarloAgreement) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(10);
    const auto mc = mc_expectation_vector(
        [&](const ShellState &s, std::span<double> out) {
            const auto b = evaluate_B(s, s, c);
            for (int n = 3; n <= 8; ++n) out[static_cast<std::size_t>(n - 3)] = b(n, 1) * b(n, 1);
        },
        6, m, 200000, 11);
    for (int n = 3; n <= 8; ++n) {
        EXPECT_LE(std::abs(mc[static_cast<std::size_t>(n - 3)].z_score(expected_B_component_square(c, m, n, 1))), 4.0);
    }
}

TEST(ExpectedTailNorm, MatchesWickOracle) {
    for (const double beta : {0.75, 1.0}) {
        const auto c = SabraCoefficients::for_beta(beta, 2.0);
        const MeasureParams big(beta, 1.3, SpectralParams(1.0, 2.0, 12));
        for (int m = 3; m <= 10; ++m) {
            const SpectralParams small(1.0, 2.0, m);
            CylindricalPolynomial total;
            for (int n = 1; n <= m; ++n) {
                for (int i = 1; i <= 2; ++i) {
                    const auto d = nonlinearity_polynomial(c, small, n, i) - nonlinearity_polynomial(c, big.spectral, n, i);
                    total += d * d;
                }
            }
            const double oracle = gaussian_expectation(total, big);
            EXPECT_NEAR(expected_tail_norm(c, big, m), oracle, 1e-12 * oracle) << "beta=" << beta << " m=" << m;
        }
    }
}

TEST(ExpectedTailNorm, GeometricDecayAndDivergence) {
    const auto c1 = reference_coefficients();
    const auto m1 = reference_measure(20);
    for (int m = 3; m < 15; ++m) {
        EXPECT_NEAR(expected_tail_norm(c1, m1, m + 1) / expected_tail_norm(c1, m1, m), 0.25, 1e-13);
    }
    const auto c_quarter = SabraCoefficients::for_beta(0.25, 2.0);
    const auto m_quarter = reference_measure(20, 0.25);
    for (int m = 3; m < 15; ++m) {
        EXPECT_GT(expected_tail_norm(c_quarter, m_quarter, m + 1), expected_tail_norm(c_quarter, m_quarter, m));
    }
}

TEST(ExpectedTailNorm, MonteCarloAtEight) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(12);
    const auto est = mc_expectation(
        [&](const ShellState &s) {
            const auto d = tail_difference(s, c, 8);
            return inner(d, d);
        },
        m, 100000, 12);
    EXPECT_LE(std::abs(est.z_score(expected_tail_norm(c, m, 8))), 4.0);
}

TEST(Kolmogorov, ConstantAndLinearExamples) {
    sabra::test::StateGenerator gen(50);
    const auto c = reference_coefficients();
    const auto m = reference_measure(6);
    for (int t = 0; t < 10; ++t) {
        const auto s = gen(m.spectral);
        EXPECT_EQ(apply_kolmogorov(CylindricalPolynomial(3.0), s, c, m), 0.0);
        const double expected = -evaluate_B(s, s, c)(1, 1) - m.nu * m.spectral.eigenvalue(1) * s(1, 1);
        EXPECT_NEAR(apply_kolmogorov(x(1, 1), s, c, m), expected, 1e-12 * (1.0 + std::abs(expected)));
    }
    EXPECT_THROW((void)apply_kolmogorov(x(5, 1), gen(m.spectral), c, m), PreconditionError);
}

TEST(Kolmogorov, PartsMatchSymbolicGenerator) {
    sabra::test::StateGenerator gen(51);
    const auto c = reference_coefficients();
    const auto m = reference_measure(8);
    for (const auto &phi : small_battery()) {
        const KolmogorovOperator k(phi, c, m);
        const auto q = generator_polynomial(phi, c, m, true, false);
        const auto l = generator_polynomial(phi, c, m, false, true);
        for (int t = 0; t < 5; ++t) {
            const auto s = gen(m.spectral, 0.5);
            EXPECT_NEAR(k.symmetric_part(s), q(s), 1e-10 * (1.0 + std::abs(q(s))));
            EXPECT_NEAR(k.nonlinear_part(s), l(s), 1e-10 * (1.0 + std::abs(l(s))));
        }
    }
}

// Q phi and L phi are polynomials, so their mu-integrals can be evaluated
// exactly; both vanish when lambda^(2 beta) = -a/(a+b) and the measure uses
// the same beta.
TEST(Kolmogorov, ExactInfinitesimalInvariance) {
    for (const double beta : {0.75, 1.0, 1.4}) {
        const auto c = SabraCoefficients::for_beta(beta, 2.0);
        const MeasureParams m(beta, 0.8, reference_space(8));
        for (const auto &phi : small_battery()) {
            const double q = gaussian_expectation(generator_polynomial(phi, c, m, true, false), m);
            const double l = gaussian_expectation(generator_polynomial(phi, c, m, false, true), m);
            EXPECT_NEAR(q, 0.0, 1e-12);
            EXPECT_NEAR(l, 0.0, 1e-12);
        }
    }
}

TEST(Kolmogorov, ExactCarreDuChamp) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(8);
    for (const auto &phi : small_battery()) {
        const auto kphi = generator_polynomial(phi, c, m, true, true);
        CylindricalPolynomial grad;
        for (std::size_t var : phi.variables()) {
            const int n = static_cast<int>(var / 2) + 1;
            const auto d = phi.derivative(var);
            grad += std::pow(m.spectral.eigenvalue(n), 1.0 - m.beta) * (d * d);
        }
        const double lhs = gaussian_expectation(phi * kphi, m);
        const double rhs = -gaussian_expectation(grad, m);
        EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST(Kolmogorov, MonteCarloInvariance) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(8);
    const auto battery = small_battery();
    std::vector<KolmogorovOperator> ops;
    for (const auto &phi : battery) ops.emplace_back(phi, c, m);
    const auto est = mc_expectation_vector(
        [&](const ShellState &s, std::span<double> out) {
            for (std::size_t k = 0; k < ops.size(); ++k) out[k] = ops[k](s);
        },
        ops.size(), m, 100000, 13);
    for (const auto &e : est) EXPECT_LE(std::abs(e.z_score(0.0)), 4.0);
}

TEST(Integrability, FourthMomentsOfBMatchMonteCarlo) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(8);
    std::vector<double> exact;
    for (int n = 1; n <= 6; ++n) {
        const auto b1 = nonlinearity_polynomial(c, m.spectral, n, 1);
        const auto b2 = nonlinearity_polynomial(c, m.spectral, n, 2);
        const auto sq = b1 * b1 + b2 * b2;
        exact.push_back(gaussian_expectation(sq * sq, m));
        EXPECT_TRUE(std::isfinite(exact.back()));
    }
    const auto est = mc_expectation_vector(
        [&](const ShellState &s, std::span<double> out) {
            const auto b = evaluate_B(s, s, c);
            for (int n = 1; n <= 6; ++n) {
                const double e = shell_energy(b, n);
                out[static_cast<std::size_t>(n - 1)] = e * e;
            }
        },
        6, m, 200000, 14);
    for (std::size_t k = 0; k < exact.size(); ++k) EXPECT_LE(std::abs(est[k].z_score(exact[k])), 4.0) << k;
}

// sum_n lambda_n^alpha E|B_n|^2 is a geometric series with ratio
// lambda^(2(alpha - 1)) at beta = 1: finite iff alpha < 1.
TEST(Integrability, SobolevSecondMomentOfB) {
    const auto c = reference_coefficients();
    const auto m = reference_measure(10);
    for (const double alpha : {-0.5, 0.0, 0.5, 0.9, 1.0, 1.2}) {
        double previous = 0.0;
        for (int n = 4; n <= 30; ++n) {
            const double term = std::pow(m.spectral.eigenvalue(n), alpha) *
                                (expected_B_component_square(c, m, n, 1) + expected_B_component_square(c, m, n, 2));
            if (n > 4) {
                EXPECT_NEAR(term / previous, std::pow(2.0, 2 * (alpha - 1.0)), 1e-12);
            }
            previous = term;
        }
    }
}

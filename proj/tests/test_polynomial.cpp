#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sabra/polynomial.hpp"
#include "test_support.hpp"

using namespace sabra;

namespace {

CylindricalPolynomial x(int n, int i) { return CylindricalPolynomial::shell_component(n, i); }

double double_factorial(int k) {
    double r = 1.0;
    for (int j = k; j > 1; j -= 2) r *= j;
    return r;
}

}  // namespace

TEST(CylindricalPolynomial, ArithmeticAndEvaluation) {
    const auto p = 3.0 * x(1, 1) * x(2, 2) - x(1, 2) * x(1, 2) + CylindricalPolynomial(0.5);
    const auto params = sabra::test::reference_space(3);
    const ShellState s(params, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    EXPECT_DOUBLE_EQ(p(s), 3.0 * 1.0 * 4.0 - 4.0 + 0.5);
    EXPECT_EQ(p.degree(), 2);
    EXPECT_EQ(p.variables(), (std::vector<std::size_t>{0, 1, 3}));
    EXPECT_TRUE((p - p).is_zero());
    EXPECT_TRUE(CylindricalPolynomial(0.0).is_zero());
}

TEST(CylindricalPolynomial, Derivatives) {
    // phi = x11^3 x21 + 2 x11 - 7
    const auto phi = x(1, 1) * x(1, 1) * x(1, 1) * x(2, 1) + 2.0 * x(1, 1) - CylindricalPolynomial(7.0);
    const auto d = phi.derivative(component_index(1, 1));
    const auto dd = d.derivative(component_index(1, 1));
    const auto params = sabra::test::reference_space(3);
    const ShellState s(params, {1.5, 0.0, -2.0, 0.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(d(s), 3.0 * 1.5 * 1.5 * -2.0 + 2.0);
    EXPECT_DOUBLE_EQ(dd(s), 6.0 * 1.5 * -2.0);
    EXPECT_TRUE(phi.derivative(component_index(3, 2)).is_zero());
    EXPECT_TRUE(CylindricalPolynomial(4.0).derivative(0).is_zero());
}

TEST(CylindricalPolynomial, ProductMatchesPointwiseProduct) {
    sabra::test::StateGenerator gen(30);
    const auto params = sabra::test::reference_space(4);
    const auto p = x(1, 1) + 2.0 * x(2, 2) * x(3, 1) - CylindricalPolynomial(1.0);
    const auto q = x(4, 2) * x(1, 1) + x(2, 1);
    const auto pq = p * q;
    for (int t = 0; t < 20; ++t) {
        const auto s = gen(params);
        EXPECT_NEAR(pq(s), p(s) * q(s), 1e-12 * (1.0 + std::abs(p(s) * q(s))));
    }
}

TEST(Wick, PureMomentsMatchDoubleFactorial) {
    const double var = 0.37;
    const auto cov = [var](std::size_t i, std::size_t j) { return i == j ? var : 0.0; };
    for (int k = 0; k <= 12; ++k) {
        CylindricalPolynomial p(1.0);
        for (int j = 0; j < k; ++j) p = p * x(2, 1);
        const double expected = (k % 2 == 1) ? 0.0 : double_factorial(k - 1) * std::pow(var, k / 2);
        EXPECT_NEAR(wick_expectation(p, cov), expected, 1e-12 * std::max(1.0, expected)) << "k=" << k;
    }
}

TEST(Wick, MixedDiagonalMoments) {
    const auto cov = [](std::size_t i, std::size_t j) { return i == j ? 1.0 + static_cast<double>(i) : 0.0; };
    // E[x0^2 x3^4] = 1 * 3 * 4^2
    const auto p = x(1, 1) * x(1, 1) * x(2, 2) * x(2, 2) * x(2, 2) * x(2, 2);
    EXPECT_DOUBLE_EQ(wick_expectation(p, cov), 48.0);
    EXPECT_EQ(wick_expectation(x(1, 1) * x(2, 2), cov), 0.0);
}

TEST(Wick, FullCovarianceIsserlis) {
    // Non-diagonal covariance exercises the pairing sum itself.
    const double c[4][4] = {{2.0, 0.3, -0.1, 0.5}, {0.3, 1.0, 0.2, 0.0}, {-0.1, 0.2, 1.5, 0.4}, {0.5, 0.0, 0.4, 3.0}};
    const auto cov = [&](std::size_t i, std::size_t j) { return c[i][j]; };
    CylindricalPolynomial p;
    p.add_term(1.0, {{0, 1}, {1, 1}, {2, 1}, {3, 1}});
    EXPECT_NEAR(wick_expectation(p, cov), c[0][1] * c[2][3] + c[0][2] * c[1][3] + c[0][3] * c[1][2], 1e-15);
    CylindricalPolynomial q;
    q.add_term(1.0, {{0, 2}, {1, 2}});
    EXPECT_NEAR(wick_expectation(q, cov), c[0][0] * c[1][1] + 2 * c[0][1] * c[0][1], 1e-15);
}

TEST(Wick, RejectsExcessiveDegree) {
    CylindricalPolynomial p(1.0);
    for (int j = 0; j < 14; ++j) p = p * x(1, 1);
    EXPECT_THROW((void)wick_expectation(p, [](std::size_t, std::size_t) { return 1.0; }), PreconditionError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sabra/shell_space.hpp"
#include "test_support.hpp"

using namespace sabra;
using sabra::test::reference_space;
using sabra::test::single_shell;
using sabra::test::StateGenerator;

TEST(SpectralParams, RejectsInvalidParameters) {
    EXPECT_THROW(SpectralParams(0.0, 2.0, 5), PreconditionError);
    EXPECT_THROW(SpectralParams(1.0, 1.0, 5), PreconditionError);
    EXPECT_THROW(SpectralParams(1.0, 2.0, 2), PreconditionError);
    EXPECT_THROW(SpectralParams(1.0, 2.0, 40), PreconditionError);
    EXPECT_NO_THROW(SpectralParams(1.0, 2.0, 25));
}

TEST(SpectralParams, EigenvaluesAreStrictlyIncreasing) {
    const SpectralParams p(0.3, 1.7, 20);
    for (int n = 1; n < p.shells(); ++n) {
        EXPECT_LT(p.eigenvalue(n), p.eigenvalue(n + 1));
        EXPECT_NEAR(p.wavenumber(n) * p.wavenumber(n), p.eigenvalue(n), 1e-12 * p.eigenvalue(n));
    }
}

TEST(Eigenvalue, HandValues) {
    EXPECT_DOUBLE_EQ(eigenvalue(SpectralParams(1.0, 2.0, 5), 1), 4.0);
    EXPECT_DOUBLE_EQ(eigenvalue(SpectralParams(1.0, 2.0, 5), 3), 64.0);
    EXPECT_DOUBLE_EQ(eigenvalue(SpectralParams(0.5, 2.0, 5), 2), 4.0);
    EXPECT_THROW(eigenvalue(SpectralParams(1.0, 2.0, 5), 0), PreconditionError);
}

TEST(ShellState, RejectsWrongLengthAndNonFinite) {
    const auto p = reference_space(4);
    EXPECT_THROW(ShellState(p, std::vector<double>(7, 0.0)), PreconditionError);
    std::vector<double> bad(8, 0.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ShellState(p, bad), PreconditionError);
    bad[3] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(ShellState(p, bad), PreconditionError);
}

TEST(ShellState, OutOfRangeShellsReadAsZero) {
    const auto s = single_shell(reference_space(4), 4, 1.0, 2.0);
    EXPECT_EQ(s(0, 1), 0.0);
    EXPECT_EQ(s(5, 2), 0.0);
    EXPECT_EQ(s(-1, 1), 0.0);
    EXPECT_EQ(s(4, 2), 2.0);
}

TEST(SobolevNorm, Examples) {
    const auto p = reference_space(5);
    EXPECT_EQ(sobolev_norm(ShellState(p), SobolevIndex{-1.5}), 0.0);
    EXPECT_DOUBLE_EQ(sobolev_norm(single_shell(p, 1, 1.0, 0.0), SobolevIndex{0.0}), 1.0);
    EXPECT_DOUBLE_EQ(sobolev_norm(single_shell(p, 2, 3.0, 4.0), SobolevIndex{1.0}), 20.0);
}

TEST(ApplyPower, Examples) {
    const auto p = reference_space(5);
    StateGenerator gen(1);
    const auto s = gen(p);
    EXPECT_EQ(apply_power(s, 0.0), s);

    const auto scaled = apply_power(single_shell(p, 2, 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(scaled(2, 1), 16.0);
    EXPECT_DOUBLE_EQ(scaled(2, 2), 16.0);
    EXPECT_EQ(scaled(1, 1), 0.0);

    const auto back = apply_power(apply_power(s, -1.0), 1.0);
    for (int n = 1; n <= 5; ++n) {
        for (int i = 1; i <= 2; ++i) {
            EXPECT_LE(std::abs(back(n, i) - s(n, i)), 1e-14 * std::abs(s(n, i)));
        }
    }
}

TEST(ApplyPower, CompositionAddsExponents) {
    StateGenerator gen(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = SpectralParams(gen.uniform(0.2, 3.0), gen.uniform(1.1, 2.5), 3 + trial % 14);
        const auto s = gen(p);
        const double a = gen.uniform(-1.5, 1.5);
        const double b = gen.uniform(-1.5, 1.5);
        const auto lhs = apply_power(apply_power(s, a), b);
        const auto rhs = apply_power(s, a + b);
        for (int n = 1; n <= p.shells(); ++n) {
            for (int i = 1; i <= 2; ++i) {
                EXPECT_LE(std::abs(lhs(n, i) - rhs(n, i)), 1e-13 * std::abs(rhs(n, i))) << "trial " << trial;
            }
        }
    }
}

TEST(SobolevNorm, MatchesPowerOperatorNorm) {
    StateGenerator gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = SpectralParams(gen.uniform(0.2, 3.0), gen.uniform(1.1, 2.5), 3 + trial % 14);
        const auto s = gen(p);
        const double alpha = gen.uniform(-2.0, 2.0);
        const double direct = std::pow(sobolev_norm(s, SobolevIndex{alpha}), 2);
        const double via_power = std::pow(norm(apply_power(s, alpha / 2.0)), 2);
        EXPECT_LE(std::abs(direct - via_power), 1e-13 * direct);
    }
}

TEST(Project, IdentityIdempotenceAndZeroTail) {
    const auto p = reference_space(4);
    StateGenerator gen(4);
    const auto s = gen(p);
    EXPECT_EQ(project(s, 4), s);
    EXPECT_EQ(project(project(s, 2), 2), project(s, 2));
    const auto t = project(s, 2);
    EXPECT_EQ(t(3, 1), 0.0);
    EXPECT_EQ(t(3, 2), 0.0);
    EXPECT_EQ(t(4, 1), 0.0);
    EXPECT_EQ(t(4, 2), 0.0);
    EXPECT_EQ(t(2, 2), s(2, 2));
    EXPECT_THROW((void)project(s, 0), PreconditionError);
    EXPECT_THROW((void)project(s, 5), PreconditionError);
}

TEST(Project, ContractionInEverySobolevNorm) {
    StateGenerator gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = reference_space(3 + trial % 15);
        const auto s = gen(p);
        const int m = 1 + trial % p.shells();
        const double alpha = gen.uniform(-3.0, 3.0);
        EXPECT_LE(sobolev_norm(project(s, m), SobolevIndex{alpha}), sobolev_norm(s, SobolevIndex{alpha}));
    }
}

TEST(HilbertSchmidtSum, Verdicts) {
    const auto p = reference_space(5);
    const auto equal = hilbert_schmidt_sum(p, 1.0, 1.0, 50);
    EXPECT_FALSE(equal.converges);
    EXPECT_DOUBLE_EQ(equal.partial_sum, 50.0);

    const auto geo = hilbert_schmidt_sum(p, 0.0, 1.0, 60);
    EXPECT_TRUE(geo.converges);
    EXPECT_NEAR(geo.partial_sum, 1.0 / 3.0, 1e-15);

    EXPECT_TRUE(hilbert_schmidt_sum(p, 0.2, 0.9, 3).converges);
    EXPECT_FALSE(hilbert_schmidt_sum(p, 1.2, 0.9, 3).converges);
    EXPECT_THROW((void)hilbert_schmidt_sum(p, 0.0, 1.0, 0), PreconditionError);
}

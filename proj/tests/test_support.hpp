#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sabra/gibbs_measure.hpp"
#include "sabra/sabra.hpp"
#include "sabra/shell_space.hpp"

namespace sabra::test {

/// k0 = 1, lambda = 2 with M shells.
inline SpectralParams reference_space(int shells) { return SpectralParams(1.0, 2.0, shells); }

/// a = 1, b = -1.25 so that beta = 1 at lambda = 2.
inline SabraCoefficients reference_coefficients() { return SabraCoefficients(1.0, -1.25, 2.0); }

/// States with i.i.d. N(0, scale^2) components; the generator is owned by
/// the test so every test case is reproducible on its own.
class StateGenerator {
  public:
    explicit StateGenerator(std::uint64_t seed) : engine_(seed) {}

    ShellState operator()(const SpectralParams &params, double scale = 1.0) {
        std::vector<double> x(params.dimension());
        for (double &v : x) v = scale * normal_(engine_);
        return ShellState(params, std::move(x));
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

inline ShellState single_shell(const SpectralParams &params, int n, double x1, double x2) {
    ShellState s(params);
    s.set(n, 1, x1);
    s.set(n, 2, x2);
    return s;
}

}  // namespace sabra::test

#pragma once

// Time integration of the truncated shell dynamics:
//   OU:        dz + nu A z dt = sqrt(2 A^(1-beta)) dw                (exact kernel)
//   viscous:   du + (nu eps A u + B(u,u)) dt = sqrt(2 eps A^(1-beta)) dw
//              (exponential Euler-Maruyama; eps = 1 is the reference equation)
//   inviscid:  du/dt + B(u,u) = 0                                    (RK4, implicit midpoint)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sabra/error.hpp"
#include "sabra/gibbs_measure.hpp"
#include "sabra/hash.hpp"
#include "sabra/rng.hpp"
#include "sabra/sabra.hpp"
#include "sabra/shell_space.hpp"

namespace sabra {

enum class Scheme { ou_exact, expo_em, rk4, implicit_midpoint };

inline const char *to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::ou_exact: return "ou_exact";
        case Scheme::expo_em: return "expo_em";
        case Scheme::rk4: return "rk4";
        case Scheme::implicit_midpoint: return "implicit_midpoint";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string &s) {
    if (s == "ou_exact") return Scheme::ou_exact;
    if (s == "expo_em") return Scheme::expo_em;
    if (s == "rk4") return Scheme::rk4;
    if (s == "implicit_midpoint") return Scheme::implicit_midpoint;
    throw PreconditionError("unknown scheme '" + s + "'");
}

inline bool is_stochastic(Scheme s) noexcept { return s == Scheme::ou_exact || s == Scheme::expo_em; }

struct SimConfig {
    double dt;
    double t_end;
    double epsilon;  ///< 0 selects the inviscid deterministic equation
    SabraCoefficients coeffs;
    MeasureParams measure;  ///< nu and beta of the dynamics and of its invariant Gaussian
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::expo_em;
    std::uint64_t stride = 1;  ///< steps between recorded snapshots
    std::uint64_t stream = 0;  ///< trajectory id; noise uses stream 2*id, the initial draw 2*id+1
    bool with_noise = true;
    double blowup_factor = 1e6;

    [[nodiscard]] double nu() const noexcept { return measure.nu; }
    [[nodiscard]] std::uint64_t steps() const noexcept {
        return static_cast<std::uint64_t>(std::llround(t_end / dt));
    }

    void validate() const {
        detail::require(std::isfinite(dt) && dt > 0.0, "SimConfig: dt must be positive");
        detail::require(std::isfinite(t_end) && dt <= t_end, "SimConfig: dt must not exceed t_end");
        detail::require(std::isfinite(epsilon) && epsilon >= 0.0, "SimConfig: epsilon must be nonnegative");
        detail::require(stride >= 1, "SimConfig: stride must be >= 1");
        if (epsilon == 0.0) {
            detail::require(!is_stochastic(scheme), "SimConfig: epsilon = 0 forbids stochastic schemes");
        } else {
            detail::require(is_stochastic(scheme), "SimConfig: inviscid schemes require epsilon = 0");
        }
    }

    [[nodiscard]] std::string fingerprint() const {
        std::ostringstream os;
        os.precision(17);
        os << "dt=" << dt << ";t_end=" << t_end << ";eps=" << epsilon << ";a=" << coeffs.a() << ";b=" << coeffs.b()
           << ";beta=" << measure.beta << ";nu=" << measure.nu << ";k0=" << measure.spectral.k0()
           << ";lambda=" << measure.spectral.lambda() << ";M=" << measure.spectral.shells() << ";seed=" << seed
           << ";scheme=" << to_string(scheme) << ";stride=" << stride << ";stream=" << stream
           << ";noise=" << with_noise;
        return hex64(fnv1a(os.str()));
    }
};

/// Exponential integrator for du + (nu eps A u + B(u,u)) dt = sqrt(2 eps A^(1-beta)) dw:
///   u' = e^(-nu eps A dt) (u - dt B(u,u)) + sigma(dt) xi,
///   sigma_n(dt)^2 = (1 - e^(-2 nu eps lambda_n dt)) / (nu lambda_n^beta),
/// which is the exact transition of each linear mode. Without the
/// nonlinearity the step is the exact OU kernel.
class ExpoEulerStepper {
  public:
    ExpoEulerStepper(const SabraCoefficients &coeffs, const MeasureParams &measure, double dt, double epsilon,
                     bool nonlinear)
        : op_(coeffs, measure.spectral),
          dt_(dt),
          nonlinear_(nonlinear),
          decay_(measure.spectral.dimension()),
          sigma_(measure.spectral.dimension()),
          drift_(measure.spectral.dimension()) {
        detail::require(dt > 0.0, "ExpoEulerStepper: dt must be positive");
        detail::require(epsilon > 0.0, "ExpoEulerStepper: epsilon must be positive");
        for (int n = 1; n <= measure.spectral.shells(); ++n) {
            const double rate = measure.nu * epsilon * measure.spectral.eigenvalue(n);
            const double decay = std::exp(-rate * dt);
            const double sigma = std::sqrt(-std::expm1(-2.0 * rate * dt) * measure.shell_variance(n));
            for (int i = 1; i <= 2; ++i) {
                decay_[component_index(n, i)] = decay;
                sigma_[component_index(n, i)] = sigma;
            }
        }
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return decay_.size(); }

    /// One step from u into out (may alias u). noise holds one standard
    /// normal per component, or is empty for a noise-free step.
    void step(std::span<const double> u, std::span<const double> noise, std::span<double> out) {
        if (nonlinear_) {
            op_.apply(u, u, drift_);
            for (std::size_t k = 0; k < decay_.size(); ++k) {
                out[k] = decay_[k] * (u[k] - dt_ * drift_[k]);
            }
        } else {
            for (std::size_t k = 0; k < decay_.size(); ++k) {
                out[k] = decay_[k] * u[k];
            }
        }
        if (!noise.empty()) {
            for (std::size_t k = 0; k < decay_.size(); ++k) {
                out[k] += sigma_[k] * noise[k];
            }
        }
    }

  private:
    SabraOperator op_;
    double dt_;
    bool nonlinear_;
    std::vector<double> decay_;
    std::vector<double> sigma_;
    std::vector<double> drift_;
};

/// Exact OU transition z' = e^(-nu lambda_n dt) z + sigma_n(dt) xi.
inline ShellState ou_exact_step(const ShellState &z, double dt, const MeasureParams &params,
                                std::span<const double> noise) {
    detail::require(z.params() == params.spectral, "ou_exact_step: state and measure spaces differ");
    detail::require(noise.empty() || noise.size() == z.params().dimension(), "ou_exact_step: noise size mismatch");
    ExpoEulerStepper stepper(SabraCoefficients::unconstrained(0.0, 0.0, params.spectral.lambda(), params.beta),
                             params, dt, 1.0, false);
    std::vector<double> out(z.params().dimension());
    stepper.step(z.components(), noise, out);
    return ShellState(z.params(), std::move(out));
}

/// One exponential Euler-Maruyama step of the viscous stochastic equation.
inline ShellState sde_step(const ShellState &u, const SimConfig &cfg, std::span<const double> noise) {
    detail::require(cfg.scheme == Scheme::expo_em, "sde_step: scheme must be expo_em");
    detail::require(u.params() == cfg.measure.spectral, "sde_step: state and config spaces differ");
    detail::require(noise.empty() || noise.size() == u.params().dimension(), "sde_step: noise size mismatch");
    ExpoEulerStepper stepper(cfg.coeffs, cfg.measure, cfg.dt, cfg.epsilon, true);
    std::vector<double> out(u.params().dimension());
    stepper.step(u.components(), noise, out);
    for (double v : out) {
        if (!std::isfinite(v)) {
            throw NumericalError("trajectory diverged in a single step (dt too large)");
        }
    }
    return ShellState(u.params(), std::move(out));
}

/// Deterministic integrator for du/dt = -B(u,u).
class InviscidStepper {
  public:
    static constexpr double kMidpointTolerance = 1e-13;
    static constexpr int kMidpointMaxIterations = 100;

    InviscidStepper(const SabraCoefficients &coeffs, const SpectralParams &params, double dt, Scheme scheme)
        : op_(coeffs, params), dt_(dt), scheme_(scheme), weight_(params.dimension()) {
        detail::require(scheme == Scheme::rk4 || scheme == Scheme::implicit_midpoint,
                        "InviscidStepper: scheme must be rk4 or implicit_midpoint");
        detail::require(dt > 0.0, "InviscidStepper: dt must be positive");
        for (int n = 1; n <= params.shells(); ++n) {
            const double w = std::pow(params.eigenvalue(n), coeffs.beta());
            weight_[component_index(n, 1)] = w;
            weight_[component_index(n, 2)] = w;
        }
        for (auto *buf : {&k1_, &k2_, &k3_, &k4_, &tmp_, &next_}) {
            buf->resize(params.dimension());
        }
    }

    void step(std::span<const double> u, std::span<double> out) {
        if (scheme_ == Scheme::rk4) {
            rk4(u, out);
        } else {
            midpoint(u, out);
        }
    }

  private:
    void rhs(std::span<const double> x, std::vector<double> &out) {
        op_.apply(x, x, out);
        for (double &v : out) {
            v = -v;
        }
    }

    void rk4(std::span<const double> u, std::span<double> out) {
        const std::size_t d = u.size();
        rhs(u, k1_);
        for (std::size_t k = 0; k < d; ++k) tmp_[k] = u[k] + 0.5 * dt_ * k1_[k];
        rhs(tmp_, k2_);
        for (std::size_t k = 0; k < d; ++k) tmp_[k] = u[k] + 0.5 * dt_ * k2_[k];
        rhs(tmp_, k3_);
        for (std::size_t k = 0; k < d; ++k) tmp_[k] = u[k] + dt_ * k3_[k];
        rhs(tmp_, k4_);
        for (std::size_t k = 0; k < d; ++k) {
            out[k] = u[k] + dt_ / 6.0 * (k1_[k] + 2.0 * k2_[k] + 2.0 * k3_[k] + k4_[k]);
        }
    }

    [[nodiscard]] double weighted_norm(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += weight_[k] * x[k] * x[k];
        return std::sqrt(s);
    }

    // Fixed-point iteration for u' = u - dt B(m, m), m = (u + u')/2, started
    // from the explicit Euler predictor. Convergence is measured in H^beta;
    // one extra sweep after the tolerance is met pushes the residual to
    // rounding level.
    void midpoint(std::span<const double> u, std::span<double> out) {
        const std::size_t d = u.size();
        rhs(u, k1_);
        for (std::size_t k = 0; k < d; ++k) next_[k] = u[k] + dt_ * k1_[k];
        const double scale = weighted_norm(u);
        bool converged = false;
        for (int it = 0; it < kMidpointMaxIterations; ++it) {
            for (std::size_t k = 0; k < d; ++k) tmp_[k] = 0.5 * (u[k] + next_[k]);
            rhs(tmp_, k1_);
            double diff = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double v = u[k] + dt_ * k1_[k];
                diff += weight_[k] * (v - next_[k]) * (v - next_[k]);
                next_[k] = v;
            }
            if (converged) {
                break;
            }
            if (!std::isfinite(diff)) {
                break;
            }
            converged = std::sqrt(diff) <= kMidpointTolerance * scale;
        }
        if (!converged) {
            throw NumericalError("midpoint nonconvergence: fixed-point iteration did not reach 1e-13 in " +
                                 std::to_string(kMidpointMaxIterations) + " iterations (dt too large)");
        }
        std::copy(next_.begin(), next_.end(), out.begin());
    }

    SabraOperator op_;
    double dt_;
    Scheme scheme_;
    std::vector<double> weight_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_, next_;
};

inline ShellState inviscid_step(const ShellState &u, double dt, const SabraCoefficients &coeffs, Scheme scheme) {
    InviscidStepper stepper(coeffs, u.params(), dt, scheme);
    std::vector<double> out(u.params().dimension());
    stepper.step(u.components(), out);
    return ShellState(u.params(), std::move(out));
}

struct Trajectory {
    std::vector<double> times;
    std::vector<ShellState> states;
    std::string config_hash;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    /// Time between consecutive snapshots.
    [[nodiscard]] double spacing() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Snapshot callback: (time, components). Return false to stop early.
using SnapshotObserver = std::function<bool(double, std::span<const double>)>;

namespace detail {

inline double squared(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace detail

/// Integrates the configured equation and reports every `stride`-th state,
/// including the initial one. Without an initial state the run starts from
/// a mu^{beta,nu} draw (a stationary start).
inline void simulate_streaming(const SimConfig &cfg, const std::optional<ShellState> &initial,
                               const SnapshotObserver &observer) {
    cfg.validate();
    const auto &spectral = cfg.measure.spectral;
    std::vector<double> u = initial ? initial->data() : sample(cfg.measure, cfg.seed, 2 * cfg.stream + 1).data();
    detail::require(u.size() == spectral.dimension(), "simulate: initial state lives on a different space");

    double reference = 0.0;
    for (int n = 1; n <= spectral.shells(); ++n) reference += 2.0 * cfg.measure.shell_variance(n);
    const double scale = std::max(std::sqrt(detail::squared(u)), std::sqrt(reference));
    const double limit = cfg.blowup_factor * scale;

    const std::uint64_t steps = cfg.steps();
    const bool stochastic = is_stochastic(cfg.scheme);
    std::optional<ExpoEulerStepper> sde;
    std::optional<InviscidStepper> inviscid;
    if (stochastic) {
        sde.emplace(cfg.coeffs, cfg.measure, cfg.dt, cfg.epsilon, cfg.scheme == Scheme::expo_em);
    } else {
        inviscid.emplace(cfg.coeffs, spectral, cfg.dt, cfg.scheme);
    }
    NormalStream normals(cfg.seed, 2 * cfg.stream);
    std::vector<double> noise(stochastic && cfg.with_noise ? u.size() : 0);

    if (!observer(0.0, u)) {
        return;
    }
    for (std::uint64_t s = 1; s <= steps; ++s) {
        if (sde) {
            normals.fill(noise);
            sde->step(u, noise, u);
        } else {
            inviscid->step(u, u);
        }
        const double t = static_cast<double>(s) * cfg.dt;
        const double size = std::sqrt(detail::squared(u));
        if (!(size <= limit)) {
            std::ostringstream msg;
            msg << "trajectory diverged at t=" << t << " (|u|=" << size << " > " << limit << ")";
            throw NumericalError(msg.str());
        }
        if (s % cfg.stride == 0 && !observer(t, u)) {
            return;
        }
    }
}

inline Trajectory simulate(const SimConfig &cfg, const std::optional<ShellState> &initial = std::nullopt) {
    Trajectory traj;
    traj.config_hash = cfg.fingerprint();
    traj.seed = cfg.seed;
    const auto &spectral = cfg.measure.spectral;
    simulate_streaming(cfg, initial, [&](double t, std::span<const double> x) {
        traj.times.push_back(t);
        traj.states.emplace_back(spectral, std::vector<double>(x.begin(), x.end()));
        return true;
    });
    return traj;
}

}  // namespace sabra

#pragma once

// Mergeable streaming central moments (Welford updates, Pebay merge).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sabra/error.hpp"

namespace sabra {

class Moments {
  public:
    void add(double x) noexcept {
        const double n1 = static_cast<double>(count_);
        ++count_;
        const double n = static_cast<double>(count_);
        const double delta = x - mean_;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
        m2_ += term1;
    }

    void merge(const Moments &o) noexcept {
        if (o.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(o.count_);
        const double n = na + nb;
        const double delta = o.mean_ - mean_;
        const double d2 = delta * delta;
        const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
        const double m3 = m3_ + o.m3_ + d2 * delta * na * nb * (na - nb) / (n * n) +
                          3.0 * delta * (na * o.m2_ - nb * m2_) / n;
        const double m4 = m4_ + o.m4_ + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                          6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                          4.0 * delta * (na * o.m3_ - nb * m3_) / n;
        mean_ += delta * nb / n;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
        count_ += o.count_;
    }

    [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    /// Unbiased sample variance.
    [[nodiscard]] double variance() const noexcept {
        return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : std::numeric_limits<double>::quiet_NaN();
    }
    [[nodiscard]] double standard_error() const noexcept {
        return std::sqrt(variance() / static_cast<double>(count_));
    }
    [[nodiscard]] double excess_kurtosis() const noexcept {
        return static_cast<double>(count_) * m4_ / (m2_ * m2_) - 3.0;
    }
    [[nodiscard]] double skewness() const noexcept {
        return std::sqrt(static_cast<double>(count_)) * m3_ / std::pow(m2_, 1.5);
    }
    [[nodiscard]] double central_m2() const noexcept { return m2_; }
    [[nodiscard]] double central_m3() const noexcept { return m3_; }
    [[nodiscard]] double central_m4() const noexcept { return m4_; }

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

/// Per-component moments of a vector-valued stream.
class MomentAccumulator {
  public:
    explicit MomentAccumulator(std::size_t components) : moments_(components) {}

    void add(std::span<const double> x) {
        detail::require(x.size() == moments_.size(), "MomentAccumulator::add: dimension mismatch");
        for (std::size_t k = 0; k < x.size(); ++k) {
            moments_[k].add(x[k]);
        }
    }

    void merge(const MomentAccumulator &o) {
        detail::require(o.moments_.size() == moments_.size(), "MomentAccumulator::merge: dimension mismatch");
        for (std::size_t k = 0; k < moments_.size(); ++k) {
            moments_[k].merge(o.moments_[k]);
        }
    }

    [[nodiscard]] std::size_t components() const noexcept { return moments_.size(); }
    [[nodiscard]] const Moments &operator[](std::size_t k) const { return moments_.at(k); }
    [[nodiscard]] std::uint64_t count() const noexcept { return moments_.empty() ? 0 : moments_.front().count(); }

  private:
    std::vector<Moments> moments_;
};

}  // namespace sabra

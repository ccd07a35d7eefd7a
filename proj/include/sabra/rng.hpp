#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sabra {

/// Seeded stream of standard normals.
///
/// Stream splitting rule: the engine for (seed, stream) is a mt19937_64
/// initialized from seed_seq{seed_lo, seed_hi, stream_lo, stream_hi, 0x5AB4A}.
/// Stream ids are assigned per trajectory (or per sampling chunk); within a
/// stream each time step consumes one normal per component, in the order
/// (1,1), (1,2), (2,1), ..., (M,2).
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine(seed, stream)) {}

    double operator()() { return normal_(engine_); }

    void fill(std::span<double> out) {
        for (double &x : out) {
            x = normal_(engine_);
        }
    }

  private:
    static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          std::uint32_t{0x5AB4A}};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace sabra

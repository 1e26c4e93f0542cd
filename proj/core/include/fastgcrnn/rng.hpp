#pragma once

#include <cstddef>
#include <cstdint>

namespace fastgcrnn {

/// xoshiro256++ seeded via splitmix64. Self-contained so fixed-seed runs are
/// bit-reproducible regardless of standard library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Uniform integer in [0, n); n must be > 0.
    std::size_t uniform_index(std::size_t n);

    /// Independent stream derived from this generator's seed and a stream id.
    Rng fork(std::uint64_t stream) const;

private:
    std::uint64_t state_[4];
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fastgcrnn

#pragma once

#include <cstdint>

namespace seep {

/// Portable, fully specified random stream.
///
/// state_k = seed + k * 0x9E3779B97F4A7C15 (mod 2^64), output = mix(state_k)
/// where mix is the SplitMix64 finalizer. uniform() uses the top 53 bits.
/// normal() is Box-Muller without caching: two uniforms per draw.
/// gamma(a) is Marsaglia-Tsang; for a < 1 it boosts with gamma(a + 1) * u^(1/a).
/// beta(a, b) = X / (X + Y) with X ~ gamma(a), Y ~ gamma(b), X drawn first.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return 1.0 - uniform(); }
  /// Uniform integer on [0, bound), bound >= 1. Draws x until x >= (2^64 - bound) % bound, returns x % bound.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  double gamma(double shape) noexcept;
  double beta(double a, double b) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace seep

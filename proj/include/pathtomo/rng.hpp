#pragma once
// Portable pseudo-random streams.
//
// Generator: xoshiro256** (Blackman & Vigna). Its 256-bit state is filled
// from four consecutive splitmix64 outputs seeded with
//     seed ^ (0x9E3779B97F4A7C15 * (stream + 1))
// so a (seed, stream) pair fully determines the sequence on every platform.
// Uniform doubles use the top 53 bits: (x >> 11) * 2^-53.

#include <array>
#include <cstdint>

namespace pathtomo {

std::uint64_t splitmix64(std::uint64_t& state);

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  result_type operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1).
  double uniform_open();

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Poisson variate. Sequential-search inversion below mean 30, PTRS
/// transformed rejection (Hormann 1993) at and above 30. Both are exact.
std::int64_t poisson(Xoshiro256& rng, double mean);

}  // namespace pathtomo

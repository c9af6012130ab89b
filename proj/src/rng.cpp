#include "pathtomo/rng.hpp"

#include <cmath>
#include <numbers>

#include "pathtomo/errors.hpp"

namespace pathtomo {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// log(k!) without touching the global signgam that std::lgamma writes.
double log_factorial(double k) {
  static constexpr double table[10] = {0.0,
                                       0.0,
                                       0.69314718055994531,
                                       1.7917594692280550,
                                       3.1780538303479458,
                                       4.7874917427820460,
                                       6.5792512120101010,
                                       8.5251613610654143,
                                       10.604602902745251,
                                       12.801827480081469};
  if (k < 10.0) return table[static_cast<int>(k)];
  const double x = k + 1.0;
  const double ix2 = 1.0 / (x * x);
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         (1.0 / 12.0 - ix2 * (1.0 / 360.0 - ix2 / 1260.0)) / x;
}

std::int64_t poisson_inversion(Xoshiro256& rng, double mean) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) break;  // exhausted double precision in the tail
  }
  return k;
}

std::int64_t poisson_ptrs(Xoshiro256& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - log_factorial(k);
    if (lhs <= rhs) return static_cast<std::int64_t>(k);
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  for (auto& w : s_) w = splitmix64(sm);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

std::int64_t poisson(Xoshiro256& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_inversion(rng, mean);
  return poisson_ptrs(rng, mean);
}

}  // namespace pathtomo

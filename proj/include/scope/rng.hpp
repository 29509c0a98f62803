#pragma once

// Seeded RNG with hand-rolled transforms. std::normal_distribution and
// friends are implementation-defined, which would tie "same seed, same
// output" reproducibility to a particular libstdc++; the transforms below
// pin the byte stream to the mt19937_64 sequence alone.

#include <cmath>
#include <cstdint>
#include <random>

#include "scope/common.hpp"

namespace scope {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, no spare caching (two draws per sample, deterministic).
  double normal(double mu = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  Vec3 normal3(double sigma) {
    return Vec3(normal(0.0, sigma), normal(0.0, sigma), normal(0.0, sigma));
  }

  // Uniform in {0, ..., n-1}, rejection sampling (unbiased).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw InputError("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace scope

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "entrisk/special.hpp"

namespace entrisk {

// Deterministic generator used everywhere. Uniform/normal/gumbel are
// built from raw mt19937_64 output instead of std::distributions so
// that results are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    std::uint64_t x = eng_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_quantile(uniform()); }

  double gumbel() {
    double u = uniform();
    if (u < 1e-12) u = 1e-12;
    if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
    return -std::log(-std::log(u));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Integer in [0, n) by rejection-free scaling; fine for n << 2^53.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace entrisk

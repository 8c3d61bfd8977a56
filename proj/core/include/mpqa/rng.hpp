#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mpqa {

// Draw helpers built from raw mt19937_64 bits. std::uniform_real_distribution
// and friends are implementation-defined, which would break bit-exact
// reproducibility claims across toolchains.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Unbiased integer in [0, n). n must be positive.
inline uint64_t uniform_index(std::mt19937_64& g, uint64_t n) {
  const uint64_t bound = (~uint64_t{0} / n) * n;
  uint64_t r;
  do {
    r = g();
  } while (r >= bound);
  return r % n;
}

/// Standard normal via Box-Muller. Consumes two draws per call (no cached spare).
inline double normal01(std::mt19937_64& g) {
  double u1 = uniform01(g);
  while (u1 <= 0.0) u1 = uniform01(g);
  const double u2 = uniform01(g);
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& g) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(uniform_index(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace mpqa

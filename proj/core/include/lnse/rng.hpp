#pragma once

// Counter-based deterministic random numbers.  Every draw is a pure function
// of (seed, key0..key3), so results do not depend on evaluation order or on
// how work is split across threads.

#include <cmath>
#include <cstdint>

namespace lnse {

// SplitMix64 finalizer over a mixed key.
inline uint64_t counter_hash(uint64_t seed, uint64_t k0, uint64_t k1 = 0, uint64_t k2 = 0,
                             uint64_t k3 = 0) {
  uint64_t z = seed;
  auto mix = [&z](uint64_t v) {
    z += 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
  };
  mix(k0);
  mix(k1);
  mix(k2);
  mix(k3);
  return z;
}

// Uniform in (0,1), excluding 0 for safe logarithms.
inline double uniform01(uint64_t seed, uint64_t k0, uint64_t k1 = 0, uint64_t k2 = 0,
                        uint64_t k3 = 0) {
  return (double(counter_hash(seed, k0, k1, k2, k3) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal pair via Box-Muller on two counter draws.
inline void normal_pair(uint64_t seed, uint64_t k0, uint64_t k1, uint64_t k2, uint64_t k3,
                        double& g0, double& g1) {
  double u1 = uniform01(seed, k0, k1, k2, 2 * k3);
  double u2 = uniform01(seed, k0, k1, k2, 2 * k3 + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  g0 = r * std::cos(6.283185307179586476925286766559 * u2);
  g1 = r * std::sin(6.283185307179586476925286766559 * u2);
}

}  // namespace lnse

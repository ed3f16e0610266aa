#pragma once

#include <cstdint>

namespace onebit {

// splitmix64: 64-bit counter stream with a strong finalizer. Small enough
// to restate in a README, fast enough to never matter, and trivially
// splittable, which is what keeps the Monte Carlo runs independent of the
// worker count.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double strictly inside (0,1): top 53 bits plus a half-ulp
  /// offset, so 0 and 1 are unreachable and quantiles stay finite.
  double next_double() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
};

/// Seed for one trial: the splitmix finalizer applied to the master seed
/// advanced by (trial_index + 1) increments. Each trial then owns a
/// disjoint, reproducible stream regardless of scheduling order.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial_index) {
  SplitMix64 g(master_seed +
               static_cast<std::uint64_t>(trial_index) * 0x9E3779B97F4A7C15ull);
  return g.next();
}

}  // namespace onebit

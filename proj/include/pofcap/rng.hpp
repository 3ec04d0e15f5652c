// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace pofcap {

// Counter-based deterministic generator (splitmix64 finalizer over a keyed
// counter). Output depends only on (seed, stream, draw index), so every
// stochastic operation in the project can be reproduced bit-exactly from the
// seeds recorded in its config.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ 0x6a09e667f3bcc909ull) ^ mix(stream * 0x9e3779b97f4a7c15ull + 1)) {}

  std::uint64_t next_u64() { return mix(key_ ^ mix(++counter_)); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; hand-rolled so draws are identical across standard libraries.
  double normal();

  // Normal truncated to [lo, hi] by rejection.
  double truncated_normal(double mean, double sigma, double lo, double hi);

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pofcap

// SPDX-License-Identifier: Apache-2.0
#include "pofcap/rng.hpp"

#include <cmath>

namespace pofcap {

double CounterRng::normal() {
  // u1 in (0,1], u2 in [0,1)
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

double CounterRng::truncated_normal(double mean, double sigma, double lo, double hi) {
  if (sigma <= 0.0) return std::min(hi, std::max(lo, mean));
  for (int i = 0; i < 256; ++i) {
    double v = mean + sigma * normal();
    if (v >= lo && v <= hi) return v;
  }
  // Pathological bounds; fall back to clamping.
  return std::min(hi, std::max(lo, mean));
}

}  // namespace pofcap

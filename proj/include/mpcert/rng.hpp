// SPDX-License-Identifier: Apache-2.0
//
// Counter-based SplitMix64 stream ("splitmix64-v1"). Draw k of seed s is
// mix(s + (k + 1) * 0x9E3779B97F4A7C15), so streams are identical on every
// platform and compiler.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mpcert {

class SplitMix64 {
 public:
  static constexpr const char* kName = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Standard normal by Box-Muller (cosine branch, two uniforms per draw).
  double Normal() {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the unit tests.

#pragma once

#include <initializer_list>
#include <vector>

#include "mpcert/geometry.hpp"

namespace mpcert::testing {

inline Vector V(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Evenly spaced 1-D points on [lo, hi], endpoints included.
inline std::vector<double> Grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * k / (count - 1));
  return out;
}

}  // namespace mpcert::testing

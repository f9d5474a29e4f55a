// SPDX-License-Identifier: Apache-2.0
//
// Dual active-set (Goldfarb-Idnani) kernel for
//
//   min 1/2 x'Hx + f(theta)'x   s.t.  a_j'x <= b_j(theta)
//
// shared by the parametric QP engine and the pointwise QP solver. For a fixed
// working set the primal direction z and multiplier change r of adding a
// constraint depend on the working set only, never on theta.

#pragma once

#include <vector>

#include "mpcert/geometry.hpp"
#include "mpcert/problem.hpp"

namespace mpcert {

struct DualActiveSetOptions {
  double zero_tol = 1e-10;   // |z| below this is a zero direction
  double blocking_tol = 1e-12;  // r_j below -blocking_tol can block
  double tie_tol = 1e-9;     // step-length differences within tie_tol tie
  int iteration_cap = 100000;
};

struct DualStep {
  Vector z;                   // primal direction
  Vector r;                   // multiplier change, one entry per active row
  double slope = 0.0;         // a_p'z, negative unless z is zero
  bool zero_direction = false;
  std::vector<int> blocking;  // positions j in the working set with r_j < 0
};

class DualActiveSetKernel {
 public:
  /// Throws std::invalid_argument when H is not positive definite.
  DualActiveSetKernel(const Relaxation& relax, const DualActiveSetOptions& opt);

  const Matrix& hessian_inverse() const { return hinv_; }

  /// Unconstrained minimizer -H^{-1} f(theta) as an affine map of theta.
  AffineMap UnconstrainedMinimizer() const;

  DualStep Step(const std::vector<int>& active, int p) const;

 private:
  const Relaxation* relax_;
  DualActiveSetOptions opt_;
  Matrix hinv_;
};

}  // namespace mpcert

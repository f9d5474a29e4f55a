// SPDX-License-Identifier: Apache-2.0
//
// Pointwise solvers: the LP/QP relaxation solvers and the branch-and-bound
// method at one fixed theta. They take exactly the decisions the parametric
// engines certify and serve as the reference those engines are tested
// against.

#pragma once

#include <vector>

#include "mpcert/geometry.hpp"
#include "mpcert/problem.hpp"
#include "mpcert/relax_cert.hpp"

namespace mpcert {

struct PointSolution {
  double objective = 0.0;  // +inf when infeasible, -inf when unbounded
  Vector x;                // reduced variables; empty unless finite
  int iterations = 0;
};

PointSolution LpSolve(const Relaxation& relax, const Vector& theta,
                      const CertOptions& options = {});
PointSolution QpSolve(const Relaxation& relax, const Vector& theta,
                      const CertOptions& options = {});
PointSolution SolveRelaxation(const Relaxation& relax, const Vector& theta,
                              const CertOptions& options = {});

struct OnlineResult {
  double objective = 0.0;  // best integer-feasible value, +inf if none
  Vector x;                // full-length optimizer; empty unless finite
  int kappa_iter = 0;
  int kappa_node = 0;
  std::vector<Node> node_sequence;
};

/// Depth-first branch and bound: the x_i = 1 child first, lowest free index
/// branching, cuts checked as infeasibility, dominance, integer feasibility.
OnlineResult BnbSolve(const MpProblem& problem, const Vector& theta,
                      const CertOptions& options = {});

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0
//
// Small dense linear programs over the parameter space.
//
// Every LP the geometry layer needs has few variables (the parameter
// dimension, plus one for a Chebyshev radius) and many inequality rows, so
// the solver works on the dual in standard form, whose tableau has only
// (n_vars + 1) rows.

#pragma once

#include <Eigen/Dense>

namespace mpcert::lp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd point;  // primal maximizer when kOptimal
  double value = 0.0;
};

struct LpOptions {
  double pivot_tol = 1e-11;
  double feas_tol = 1e-9;
  int max_iterations = 20000;
};

/// maximize c'y  subject to  G y <= h,  y free.
LpResult Maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& h, const LpOptions& options = {});

/// True iff { y : G y <= h } is nonempty.
bool IsFeasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                const LpOptions& options = {});

}  // namespace mpcert::lp

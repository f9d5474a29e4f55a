// SPDX-License-Identifier: Apache-2.0
//
// Big-M primal simplex kernel shared by the parametric LP engine and the
// pointwise LP solver. Only the right-hand side of a relaxation depends on
// theta, so everything here (basis inverse, reduced costs, pivot columns) is
// theta-independent and both callers take identical decisions from identical
// arithmetic.
//
// Standard form of  min c'x  s.t.  A x <= b(theta), x free:
//
//   columns  [x+ (n) | x- (n) | s (m) | a (m)]
//   row i    A_i x+ - A_i x- + s_i - a_i = b_i(theta)
//   cost     [c | -c | 0 | M]

#pragma once

#include <string>
#include <vector>

#include "mpcert/geometry.hpp"
#include "mpcert/problem.hpp"

namespace mpcert {

struct SimplexOptions {
  double big_m = 1e6;
  double cost_tol = 1e-9;    // reduced cost below -cost_tol may enter
  double pivot_tol = 1e-9;   // ratio-test candidates need alpha_i > pivot_tol
  double tie_tol = 1e-9;     // ratio differences within tie_tol are ties
  int bland_after = 10000;   // pivots before switching to Bland's rule
  int pivot_cap = 100000;    // hard limit per relaxation
  int refactor_every = 64;   // pivots between fresh factorizations
};

class BigMForm {
 public:
  BigMForm(const Relaxation& relax, double big_m);

  int rows() const { return rows_; }
  int num_vars() const { return vars_; }
  int cols() const { return 2 * vars_ + 2 * rows_; }
  const Matrix& matrix() const { return matrix_; }
  const Vector& cost() const { return cost_; }

  int SlackColumn(int row) const { return 2 * vars_ + row; }
  int ArtificialColumn(int row) const { return 2 * vars_ + rows_ + row; }
  bool IsArtificial(int col) const { return col >= 2 * vars_ + rows_; }

  /// Initial basis column for a row given the sign decision on b_i(theta).
  int InitialColumn(int row, bool use_slack) const {
    return use_slack ? SlackColumn(row) : ArtificialColumn(row);
  }

 private:
  int rows_;
  int vars_;
  Matrix matrix_;
  Vector cost_;
};

class BasisFactor {
 public:
  /// Factorizes the basis; throws std::runtime_error when it is singular.
  BasisFactor(const BigMForm& form, std::vector<int> basis);

  const std::vector<int>& basis() const { return basis_; }
  const Matrix& inverse() const { return binv_; }
  bool IsBasic(int col) const { return is_basic_[col] != 0; }

  /// Entering column (-1 when no reduced cost is below -tol). Dantzig's rule
  /// with lowest index on ties, or the first eligible index under Bland.
  int Entering(bool bland, double tol) const;

  Vector Column(int col) const { return binv_ * form_->matrix().col(col); }

  /// Replaces the basic variable of `row` by `col`; alpha = Column(col).
  void Pivot(int row, int col, const Vector& alpha);

  void Refactor();

  /// For each structural variable, basis rows of its x+ and x- columns
  /// (-1 when nonbasic).
  std::vector<std::pair<int, int>> StructuralRows() const;

  std::string BasisString() const;

 private:
  const BigMForm* form_;
  std::vector<int> basis_;
  std::vector<char> is_basic_;
  Matrix binv_;
};

/// Applies the pivot's row operations to a right-hand side block.
void PivotRows(Matrix& rhs, const Vector& alpha, int row);

}  // namespace mpcert

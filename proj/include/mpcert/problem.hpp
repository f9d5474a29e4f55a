// SPDX-License-Identifier: Apache-2.0
//
// Multi-parametric mixed-binary programs
//
//   MILP:  min  c'x                          s.t.  A x <= b + W theta
//   MIQP:  min  1/2 x'Hx + (f + F theta)'x   s.t.  A x <= b + W theta
//
// with x_i in {0, 1} for i in the binary set, branch-and-bound nodes, and the
// convex relaxation attached to each node.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mpcert/geometry.hpp"

namespace mpcert {

enum class ProblemKind { kMilp, kMiqp };

std::string ToString(ProblemKind kind);
ProblemKind ParseProblemKind(const std::string& s);

struct MpProblem {
  ProblemKind kind = ProblemKind::kMilp;
  int n_c = 0;
  int n_b = 0;
  std::vector<int> binary_set;  // 0-based, strictly increasing

  Vector c;        // MILP only
  Matrix H;        // MIQP only
  Vector f;        // MIQP only
  Matrix f_theta;  // MIQP only, n x n_theta

  Matrix A;
  Vector b;
  Matrix W;
  Box theta0;

  int n() const { return n_c + n_b; }
  int m() const { return static_cast<int>(A.rows()); }
  int theta_dim() const { return theta0.dim(); }
  bool IsBinary(int i) const;

  /// Throws std::invalid_argument describing the first broken invariant.
  void Validate() const;
};

/// Branch-and-bound node: binaries fixed to zero and to one (sorted).
struct Node {
  std::vector<int> fixed_zero;
  std::vector<int> fixed_one;

  int depth() const {
    return static_cast<int>(fixed_zero.size() + fixed_one.size());
  }
  bool IsFixed(int i) const;
  std::string ToString() const;

  friend bool operator==(const Node&, const Node&) = default;
};

/// The node's LP/QP after substituting fixed binaries. Variables keep their
/// original relative order; rows are the problem rows followed by
/// x_i <= 1 and -x_i <= 0 for each free binary.
struct Relaxation {
  ProblemKind kind = ProblemKind::kMilp;
  std::vector<int> var_map;        // reduced index -> original index
  std::vector<int> free_binaries;  // reduced indices of free binaries
  Vector fixed_values;             // length n; fixed binaries hold 0/1

  Vector c;
  Matrix H;
  Vector f;
  Matrix f_theta;

  Matrix A;
  Vector b;
  Matrix W;

  AffineFunction shift;  // objective contribution of the fixed binaries

  int num_vars() const { return static_cast<int>(var_map.size()); }
  int num_rows() const { return static_cast<int>(A.rows()); }
  int theta_dim() const { return static_cast<int>(W.cols()); }

  AffineFunction Rhs(int row) const { return {W.row(row).transpose(), b(row)}; }
  Vector RhsAt(const Vector& theta) const { return b + W * theta; }

  /// Reduced objective at theta, shift included.
  double Objective(const Vector& x, const Vector& theta) const;

  /// Full-length vector with fixed binaries re-inserted.
  Vector Lift(const Vector& x) const;
  std::vector<AffineFunction> Lift(const AffineMap& x) const;
};

/// Throws std::invalid_argument for inconsistent nodes.
Relaxation MakeRelaxation(const MpProblem& problem, const Node& node);

/// Binaries of the problem not fixed by the node, in increasing order.
std::vector<int> FreeBinaries(const MpProblem& problem, const Node& node);

/// Lowest free binary index. Throws when every binary is fixed.
int SelectBranchIndex(const Node& node, const MpProblem& problem);

/// (child with x_i = 1, child with x_i = 0). Throws if i is fixed or not binary.
std::pair<Node, Node> Branch(const Node& node, int i, const MpProblem& problem);

}  // namespace mpcert

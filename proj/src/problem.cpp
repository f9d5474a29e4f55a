// SPDX-License-Identifier: Apache-2.0

#include "mpcert/problem.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mpcert {

std::string ToString(ProblemKind kind) {
  return kind == ProblemKind::kMilp ? "MILP" : "MIQP";
}

ProblemKind ParseProblemKind(const std::string& s) {
  std::string up = s;
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  if (up == "MILP") return ProblemKind::kMilp;
  if (up == "MIQP") return ProblemKind::kMiqp;
  throw std::invalid_argument("unknown problem kind '" + s + "'");
}

bool MpProblem::IsBinary(int i) const {
  return std::binary_search(binary_set.begin(), binary_set.end(), i);
}

void MpProblem::Validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("MpProblem: " + msg);
  };
  const int nn = n();
  if (n_c < 0 || n_b < 0) fail("negative variable count");
  if (static_cast<int>(binary_set.size()) != n_b) fail("|binary_set| != n_b");
  for (std::size_t k = 0; k < binary_set.size(); ++k) {
    if (binary_set[k] < 0 || binary_set[k] >= nn) fail("binary index out of range");
    if (k > 0 && binary_set[k] <= binary_set[k - 1]) {
      fail("binary_set must be strictly increasing");
    }
  }
  if (theta0.lower.size() != theta0.upper.size()) fail("theta bounds differ in length");
  for (int i = 0; i < theta0.dim(); ++i) {
    if (theta0.lower(i) > theta0.upper(i)) fail("theta lower exceeds upper");
  }
  if (A.cols() != nn) fail("A has wrong column count");
  if (b.size() != A.rows()) fail("b has wrong length");
  if (W.rows() != A.rows() || W.cols() != theta_dim()) fail("W has wrong shape");
  if (kind == ProblemKind::kMilp) {
    if (c.size() != nn) fail("c has wrong length");
    if (H.size() != 0 || f.size() != 0 || f_theta.size() != 0) {
      fail("MILP carries quadratic data");
    }
  } else {
    if (c.size() != 0) fail("MIQP carries a linear objective c");
    if (H.rows() != nn || H.cols() != nn) fail("H has wrong shape");
    if (f.size() != nn) fail("f has wrong length");
    if (f_theta.rows() != nn || f_theta.cols() != theta_dim()) {
      fail("f_theta has wrong shape");
    }
    if ((H - H.transpose()).lpNorm<Eigen::Infinity>() >
        1e-12 * std::max(1.0, H.lpNorm<Eigen::Infinity>())) {
      fail("H is not symmetric");
    }
    if (nn > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < 1e-8) fail("H is not positive definite");
    }
  }
}

bool Node::IsFixed(int i) const {
  return std::binary_search(fixed_zero.begin(), fixed_zero.end(), i) ||
         std::binary_search(fixed_one.begin(), fixed_one.end(), i);
}

std::string Node::ToString() const {
  std::ostringstream os;
  auto list = [&os](const std::vector<int>& v) {
    os << '{';
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << '}';
  };
  os << '(';
  list(fixed_zero);
  os << ',';
  list(fixed_one);
  os << ')';
  return os.str();
}

double Relaxation::Objective(const Vector& x, const Vector& theta) const {
  if (kind == ProblemKind::kMilp) return c.dot(x) + shift(theta);
  return 0.5 * x.dot(H * x) + (f + f_theta * theta).dot(x) + shift(theta);
}

Vector Relaxation::Lift(const Vector& x) const {
  Vector out = fixed_values;
  for (int k = 0; k < num_vars(); ++k) out(var_map[k]) = x(k);
  return out;
}

std::vector<AffineFunction> Relaxation::Lift(const AffineMap& x) const {
  const int dim = x.dim();
  std::vector<AffineFunction> out;
  out.reserve(fixed_values.size());
  for (int i = 0; i < fixed_values.size(); ++i) {
    out.push_back(AffineFunction::Constant(dim, fixed_values(i)));
  }
  for (int k = 0; k < num_vars(); ++k) out[var_map[k]] = x.Row(k);
  return out;
}

std::vector<int> FreeBinaries(const MpProblem& problem, const Node& node) {
  std::vector<int> out;
  for (int i : problem.binary_set) {
    if (!node.IsFixed(i)) out.push_back(i);
  }
  return out;
}

Relaxation MakeRelaxation(const MpProblem& problem, const Node& node) {
  const int n = problem.n();
  for (const auto* set : {&node.fixed_zero, &node.fixed_one}) {
    for (std::size_t k = 0; k < set->size(); ++k) {
      if (!problem.IsBinary((*set)[k])) {
        throw std::invalid_argument("node fixes non-binary variable " +
                                    std::to_string((*set)[k]));
      }
      if (k > 0 && (*set)[k] <= (*set)[k - 1]) {
        throw std::invalid_argument("node index sets must be sorted");
      }
    }
  }
  for (int i : node.fixed_zero) {
    if (std::binary_search(node.fixed_one.begin(), node.fixed_one.end(), i)) {
      throw std::invalid_argument("variable " + std::to_string(i) +
                                  " fixed to both 0 and 1");
    }
  }

  Relaxation r;
  r.kind = problem.kind;
  r.fixed_values = Vector::Zero(n);
  for (int i : node.fixed_one) r.fixed_values(i) = 1.0;
  for (int i = 0; i < n; ++i) {
    if (node.IsFixed(i)) continue;
    if (problem.IsBinary(i)) r.free_binaries.push_back(r.num_vars());
    r.var_map.push_back(i);
  }
  const int nr = r.num_vars();
  const int m = problem.m();
  const int nf = static_cast<int>(r.free_binaries.size());
  const int dim = problem.theta_dim();
  const Vector& e = r.fixed_values;

  Matrix P = Matrix::Zero(n, nr);
  for (int k = 0; k < nr; ++k) P(r.var_map[k], k) = 1.0;

  r.A = Matrix::Zero(m + 2 * nf, nr);
  r.b = Vector::Zero(m + 2 * nf);
  r.W = Matrix::Zero(m + 2 * nf, dim);
  r.A.topRows(m) = problem.A * P;
  r.b.head(m) = problem.b - problem.A * e;
  r.W.topRows(m) = problem.W;
  for (int k = 0; k < nf; ++k) {
    r.A(m + 2 * k, r.free_binaries[k]) = 1.0;
    r.b(m + 2 * k) = 1.0;
    r.A(m + 2 * k + 1, r.free_binaries[k]) = -1.0;
  }

  if (problem.kind == ProblemKind::kMilp) {
    r.c = P.transpose() * problem.c;
    r.shift = AffineFunction::Constant(dim, problem.c.dot(e));
  } else {
    r.H = P.transpose() * problem.H * P;
    r.f = P.transpose() * (problem.f + problem.H * e);
    r.f_theta = P.transpose() * problem.f_theta;
    r.shift = AffineFunction(problem.f_theta.transpose() * e,
                             0.5 * e.dot(problem.H * e) + problem.f.dot(e));
  }
  return r;
}

int SelectBranchIndex(const Node& node, const MpProblem& problem) {
  for (int i : problem.binary_set) {
    if (!node.IsFixed(i)) return i;
  }
  throw std::invalid_argument("SelectBranchIndex: node " + node.ToString() +
                              " has no free binary");
}

std::pair<Node, Node> Branch(const Node& node, int i, const MpProblem& problem) {
  if (!problem.IsBinary(i)) {
    throw std::invalid_argument("Branch: variable " + std::to_string(i) +
                                " is not binary");
  }
  if (node.IsFixed(i)) {
    throw std::invalid_argument("Branch: variable " + std::to_string(i) +
                                " is already fixed in " + node.ToString());
  }
  auto insert = [i](std::vector<int> v) {
    v.insert(std::upper_bound(v.begin(), v.end(), i), i);
    return v;
  };
  Node one{node.fixed_zero, insert(node.fixed_one)};
  Node zero{insert(node.fixed_zero), node.fixed_one};
  return {std::move(one), std::move(zero)};
}

}  // namespace mpcert

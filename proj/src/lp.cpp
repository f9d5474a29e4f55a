// SPDX-License-Identifier: Apache-2.0

#include "mpcert/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mpcert::lp {
namespace {

// Dense tableau for  min h'l  s.t.  M l = rhs, l >= 0,  with one artificial
// column per row.  Layout: columns [0, k) structural, [k, k + rows)
// artificial, last column right-hand side; last row holds reduced costs.
class DualTableau {
 public:
  DualTableau(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs)
      : rows_(static_cast<int>(M.rows())),
        k_(static_cast<int>(M.cols())),
        t_(rows_ + 1, k_ + rows_ + 1),
        basis_(rows_),
        sign_(rows_),
        active_(rows_, true) {
    t_.setZero();
    for (int i = 0; i < rows_; ++i) {
      sign_[i] = rhs(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(k_) = sign_[i] * M.row(i);
      t_(i, k_ + i) = 1.0;
      t_(i, Rhs()) = sign_[i] * rhs(i);
      basis_[i] = k_ + i;
    }
  }

  int Rhs() const { return k_ + rows_; }

  // Phase 1: minimize the sum of artificials. Returns the optimal sum.
  double PhaseOne(const LpOptions& opt) {
    t_.row(rows_).setZero();
    for (int i = 0; i < rows_; ++i) {
      t_.row(rows_).head(k_) -= t_.row(i).head(k_);
      t_(rows_, Rhs()) -= t_(i, Rhs());
    }
    Run(/*allow_artificial=*/false, opt);
    return -t_(rows_, Rhs());
  }

  // Pivots zero-level artificials out of the basis; rows where that is
  // impossible are linearly dependent and get deactivated.
  void DriveOutArtificials(const LpOptions& opt) {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < k_) continue;
      int best = -1;
      double best_abs = opt.pivot_tol * 100.0;
      for (int j = 0; j < k_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        Pivot(i, best);
      } else {
        active_[i] = false;
      }
    }
  }

  // Phase 2 with structural costs; returns false on unboundedness.
  bool PhaseTwo(const Eigen::VectorXd& cost, const LpOptions& opt) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(k_) = cost.transpose();
    for (int i = 0; i < rows_; ++i) {
      const int b = basis_[i];
      const double cb = b < k_ ? cost(b) : 0.0;
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
    return Run(/*allow_artificial=*/false, opt);
  }

  // Simplex multipliers of the original (unflipped) equality rows.
  Eigen::VectorXd Multipliers() const {
    Eigen::VectorXd pi(rows_);
    for (int i = 0; i < rows_; ++i) {
      pi(i) = active_[i] ? -sign_[i] * t_(rows_, k_ + i) : 0.0;
    }
    return pi;
  }

 private:
  bool Run(bool allow_artificial, const LpOptions& opt) {
    const int limit_cols = allow_artificial ? k_ + rows_ : k_;
    const int bland_after = 50 * (rows_ + k_ + 1);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
      const bool bland = iter > bland_after;
      int enter = -1;
      double most = -opt.feas_tol;
      for (int j = 0; j < limit_cols; ++j) {
        const double d = t_(rows_, j);
        if (d < most) {
          enter = j;
          most = d;
          if (bland) break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        if (!active_[i]) continue;
        const double a = t_(i, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = t_(i, Rhs()) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 &&
             basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      Pivot(leave, enter);
    }
    throw std::runtime_error("lp: iteration limit reached");
  }

  void Pivot(int r, int c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  int rows_;
  int k_;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  std::vector<double> sign_;
  std::vector<bool> active_;
};

}  // namespace

LpResult Maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& h, const LpOptions& options) {
  const int d = static_cast<int>(G.cols());
  if (c.size() != d || h.size() != G.rows()) {
    throw std::invalid_argument("lp::Maximize: dimension mismatch");
  }

  // Normalize rows; zero rows are either trivially satisfied or certify
  // infeasibility on their own.
  std::vector<int> keep;
  keep.reserve(G.rows());
  for (int j = 0; j < G.rows(); ++j) {
    const double norm = G.row(j).norm();
    if (norm <= 1e-14) {
      if (h(j) < -options.feas_tol) return {LpStatus::kInfeasible, {}, 0.0};
      continue;
    }
    keep.push_back(j);
  }
  const int k = static_cast<int>(keep.size());
  Eigen::MatrixXd Gn(k, d);
  Eigen::VectorXd hn(k);
  for (int idx = 0; idx < k; ++idx) {
    const int j = keep[idx];
    const double norm = G.row(j).norm();
    Gn.row(idx) = G.row(j) / norm;
    hn(idx) = h(j) / norm;
  }

  // Dual: min hn'l  s.t.  Gn' l = c,  l >= 0.
  DualTableau tableau(Gn.transpose(), c);
  const double infeas = tableau.PhaseOne(options);
  if (infeas > options.feas_tol * (1.0 + c.lpNorm<Eigen::Infinity>())) {
    // Dual infeasible: primal is unbounded or infeasible.
    if (c.isZero(0.0)) return {LpStatus::kInfeasible, {}, 0.0};
    if (IsFeasible(G, h, options)) return {LpStatus::kUnbounded, {}, 0.0};
    return {LpStatus::kInfeasible, {}, 0.0};
  }
  tableau.DriveOutArtificials(options);
  if (!tableau.PhaseTwo(hn, options)) return {LpStatus::kInfeasible, {}, 0.0};
  LpResult result;
  result.status = LpStatus::kOptimal;
  result.point = tableau.Multipliers();
  result.value = c.dot(result.point);
  return result;
}

bool IsFeasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                const LpOptions& options) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(G.cols());
  return Maximize(zero, G, h, options).status == LpStatus::kOptimal;
}

}  // namespace mpcert::lp

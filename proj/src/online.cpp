// SPDX-License-Identifier: Apache-2.0

#include "mpcert/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpcert/dual_active_set.hpp"
#include "mpcert/simplex.hpp"

namespace mpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckTheta(const Relaxation& relax, const Vector& theta) {
  if (theta.size() != relax.theta_dim()) {
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                ", expected " + std::to_string(relax.theta_dim()));
  }
}

}  // namespace

PointSolution LpSolve(const Relaxation& relax, const Vector& theta,
                      const CertOptions& options) {
  CheckTheta(relax, theta);
  const SimplexOptions& so = options.simplex;
  const BigMForm form(relax, so.big_m);
  const int m = form.rows();
  const Vector rhs_theta = relax.RhsAt(theta);

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    const double h = -rhs_theta(i) - options.tol.feas;
    basis[i] = form.InitialColumn(i, h <= 0.0);
  }
  BasisFactor factor(form, basis);
  Matrix value = factor.inverse() * rhs_theta;

  PointSolution sol;
  for (;;) {
    if (sol.iterations > so.pivot_cap) {
      throw std::runtime_error("simplex pivot cap exceeded");
    }
    const int enter = factor.Entering(sol.iterations >= so.bland_after, so.cost_tol);
    if (enter < 0) break;
    const Vector alpha = factor.Column(enter);
    std::vector<int> cand;
    std::vector<double> ratios;
    for (int i = 0; i < m; ++i) {
      if (alpha(i) <= so.pivot_tol) continue;
      cand.push_back(i);
      ratios.push_back(value(i, 0) / alpha(i));
    }
    const int best = cand.empty() ? -1 : cand[ArgminWinner(ratios, so.tie_tol)];
    if (best < 0) {
      sol.objective = -kInf;
      return sol;
    }
    factor.Pivot(best, enter, alpha);
    PivotRows(value, alpha, best);
    ++sol.iterations;
    if (sol.iterations % so.refactor_every == 0) {
      factor.Refactor();
      value = factor.inverse() * rhs_theta;
    }
  }

  for (int i = 0; i < m; ++i) {
    if (form.IsArtificial(factor.basis()[i]) &&
        value(i, 0) - options.tol.feas > 0.0) {
      sol.objective = kInf;
      return sol;
    }
  }
  const int n = relax.num_vars();
  sol.x = Vector::Zero(n);
  const auto rows = factor.StructuralRows();
  for (int k = 0; k < n; ++k) {
    if (rows[k].first >= 0) sol.x(k) += value(rows[k].first, 0);
    if (rows[k].second >= 0) sol.x(k) -= value(rows[k].second, 0);
  }
  sol.objective = relax.Objective(sol.x, theta);
  return sol;
}

PointSolution QpSolve(const Relaxation& relax, const Vector& theta,
                      const CertOptions& options) {
  CheckTheta(relax, theta);
  const DualActiveSetKernel kernel(relax, options.dual);
  const double tie = options.dual.tie_tol;
  const Vector b = relax.RhsAt(theta);
  auto slack = [&](const Vector& x, int i) { return b(i) - relax.A.row(i).dot(x); };

  Vector x = kernel.UnconstrainedMinimizer()(theta);
  std::vector<int> active;
  std::vector<double> u;
  PointSolution sol;
  for (;;) {
    int p = -1;
    for (int i = 0; i < relax.num_rows(); ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      if (-slack(x, i) - options.tol.feas > 0.0) {
        p = i;
        break;
      }
    }
    if (p < 0) break;
    double u_p = 0.0;
    for (;;) {
      if (sol.iterations > options.dual.iteration_cap) {
        throw std::runtime_error("active-set iteration cap exceeded");
      }
      const DualStep step = kernel.Step(active, p);
      int block = -1;
      double t1 = 0.0;
      if (!step.blocking.empty()) {
        std::vector<double> steps;
        for (int j : step.blocking) steps.push_back(u[j] / -step.r(j));
        const int w = ArgminWinner(steps, tie);
        block = step.blocking[w];
        t1 = steps[w];
      }
      bool full = false;
      double t = t1;
      if (step.zero_direction) {
        if (block < 0) {
          sol.objective = kInf;
          return sol;
        }
      } else {
        const double t2 = slack(x, p) / step.slope;
        if (block < 0 || t2 - t1 - tie <= 0.0) {
          full = true;
          t = t2;
        }
      }
      x += t * step.z;
      for (std::size_t j = 0; j < u.size(); ++j) u[j] += t * step.r(j);
      u_p += t;
      ++sol.iterations;
      if (full) {
        active.push_back(p);
        u.push_back(u_p);
        break;
      }
      active.erase(active.begin() + block);
      u.erase(u.begin() + block);
    }
  }
  sol.x = x;
  sol.objective = relax.Objective(x, theta);
  return sol;
}

PointSolution SolveRelaxation(const Relaxation& relax, const Vector& theta,
                              const CertOptions& options) {
  return relax.kind == ProblemKind::kMilp ? LpSolve(relax, theta, options)
                                          : QpSolve(relax, theta, options);
}

OnlineResult BnbSolve(const MpProblem& problem, const Vector& theta,
                      const CertOptions& options) {
  if (theta.size() != problem.theta_dim()) {
    throw std::invalid_argument("BnbSolve: theta has wrong length");
  }
  const Tolerances& tol = options.tol;
  OnlineResult result;
  result.objective = kInf;
  std::vector<Node> pending{Node{}};
  while (!pending.empty()) {
    const Node node = std::move(pending.back());
    pending.pop_back();
    const Relaxation relax = MakeRelaxation(problem, node);
    const PointSolution sol = SolveRelaxation(relax, theta, options);
    ++result.kappa_node;
    result.kappa_iter += sol.iterations;
    result.node_sequence.push_back(node);

    if (sol.objective == kInf) continue;
    bool branch = true;
    if (sol.objective == -kInf) {
      branch = !relax.free_binaries.empty();
    } else {
      if (std::isfinite(result.objective) &&
          result.objective - sol.objective - tol.value <= 0.0) {
        continue;
      }
      bool integral = true;
      for (int k : relax.free_binaries) {
        const double v = sol.x(k);
        if (std::abs(v) > tol.integrality && std::abs(v - 1.0) > tol.integrality) {
          integral = false;
          break;
        }
      }
      if (integral) {
        result.objective = sol.objective;
        result.x = relax.Lift(sol.x);
        branch = false;
      }
    }
    if (!branch) continue;
    const int i = SelectBranchIndex(node, problem);
    auto [one, zero] = Branch(node, i, problem);
    pending.push_back(std::move(zero));
    pending.push_back(std::move(one));
  }
  return result;
}

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0

#include "mpcert/dual_active_set.hpp"

#include <stdexcept>

namespace mpcert {

DualActiveSetKernel::DualActiveSetKernel(const Relaxation& relax,
                                         const DualActiveSetOptions& opt)
    : relax_(&relax), opt_(opt) {
  if (relax.kind != ProblemKind::kMiqp) {
    throw std::invalid_argument("DualActiveSetKernel: relaxation is not a QP");
  }
  const int n = relax.num_vars();
  Eigen::LLT<Matrix> llt(relax.H);
  if (n > 0 && llt.info() != Eigen::Success) {
    throw std::invalid_argument("reduced Hessian is not positive definite");
  }
  hinv_ = n > 0 ? Matrix(llt.solve(Matrix::Identity(n, n))) : Matrix(0, 0);
  hinv_ = 0.5 * (hinv_ + hinv_.transpose());
}

AffineMap DualActiveSetKernel::UnconstrainedMinimizer() const {
  return {-hinv_ * relax_->f_theta, -hinv_ * relax_->f};
}

DualStep DualActiveSetKernel::Step(const std::vector<int>& active, int p) const {
  const int n = relax_->num_vars();
  const int k = static_cast<int>(active.size());
  const Vector ap = relax_->A.row(p).transpose();
  DualStep step;
  const Vector hap = hinv_ * ap;
  if (k == 0) {
    step.r = Vector(0);
    step.z = -hap;
  } else {
    Matrix N(n, k);
    for (int j = 0; j < k; ++j) N.col(j) = relax_->A.row(active[j]).transpose();
    const Matrix hn = hinv_ * N;
    const Matrix M = N.transpose() * hn;
    Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("dual active set: singular working-set system");
    }
    step.r = -ldlt.solve(N.transpose() * hap);
    step.z = -(hap + hn * step.r);
  }
  step.zero_direction = step.z.lpNorm<Eigen::Infinity>() <= opt_.zero_tol;
  step.slope = step.zero_direction ? 0.0 : ap.dot(step.z);
  for (int j = 0; j < k; ++j) {
    if (step.r(j) < -opt_.blocking_tol) step.blocking.push_back(j);
  }
  return step;
}

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0

#include "mpcert/simplex.hpp"

#include <sstream>
#include <stdexcept>

namespace mpcert {

BigMForm::BigMForm(const Relaxation& relax, double big_m)
    : rows_(relax.num_rows()), vars_(relax.num_vars()) {
  if (relax.kind != ProblemKind::kMilp) {
    throw std::invalid_argument("BigMForm: relaxation is not an LP");
  }
  matrix_ = Matrix::Zero(rows_, cols());
  matrix_.leftCols(vars_) = relax.A;
  matrix_.middleCols(vars_, vars_) = -relax.A;
  matrix_.middleCols(2 * vars_, rows_).setIdentity();
  matrix_.rightCols(rows_) = -Matrix::Identity(rows_, rows_);
  cost_ = Vector::Zero(cols());
  cost_.head(vars_) = relax.c;
  cost_.segment(vars_, vars_) = -relax.c;
  cost_.tail(rows_).setConstant(big_m);
}

BasisFactor::BasisFactor(const BigMForm& form, std::vector<int> basis)
    : form_(&form), basis_(std::move(basis)), is_basic_(form.cols(), 0) {
  if (static_cast<int>(basis_.size()) != form.rows()) {
    throw std::invalid_argument("BasisFactor: basis has wrong size");
  }
  for (int col : basis_) is_basic_[col] = 1;
  Refactor();
}

void BasisFactor::Refactor() {
  const int m = form_->rows();
  Matrix B(m, m);
  for (int i = 0; i < m; ++i) B.col(i) = form_->matrix().col(basis_[i]);
  Eigen::FullPivLU<Matrix> lu(B);
  if (m > 0 && !lu.isInvertible()) {
    throw std::runtime_error("singular simplex basis " + BasisString());
  }
  binv_ = m > 0 ? Matrix(lu.inverse()) : Matrix(0, 0);
}

int BasisFactor::Entering(bool bland, double tol) const {
  const int m = form_->rows();
  Vector cb(m);
  for (int i = 0; i < m; ++i) cb(i) = form_->cost()(basis_[i]);
  const Eigen::RowVectorXd y = cb.transpose() * binv_;
  const Eigen::RowVectorXd d =
      form_->cost().transpose() - y * form_->matrix();
  int enter = -1;
  double most = -tol;
  for (int j = 0; j < form_->cols(); ++j) {
    if (is_basic_[j]) continue;
    if (d(j) < most) {
      enter = j;
      if (bland) break;
      most = d(j);
    }
  }
  return enter;
}

void BasisFactor::Pivot(int row, int col, const Vector& alpha) {
  const double p = alpha(row);
  if (std::abs(p) < 1e-14) {
    throw std::runtime_error("zero pivot element in basis " + BasisString());
  }
  binv_.row(row) /= p;
  for (int i = 0; i < binv_.rows(); ++i) {
    if (i == row || alpha(i) == 0.0) continue;
    binv_.row(i) -= alpha(i) * binv_.row(row);
  }
  is_basic_[basis_[row]] = 0;
  is_basic_[col] = 1;
  basis_[row] = col;
}

std::vector<std::pair<int, int>> BasisFactor::StructuralRows() const {
  const int n = form_->num_vars();
  std::vector<std::pair<int, int>> rows(n, {-1, -1});
  for (int i = 0; i < static_cast<int>(basis_.size()); ++i) {
    const int col = basis_[i];
    if (col < n) {
      rows[col].first = i;
    } else if (col < 2 * n) {
      rows[col - n].second = i;
    }
  }
  return rows;
}

std::string BasisFactor::BasisString() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < basis_.size(); ++i) os << (i ? " " : "") << basis_[i];
  os << ']';
  return os.str();
}

void PivotRows(Matrix& rhs, const Vector& alpha, int row) {
  rhs.row(row) /= alpha(row);
  for (int i = 0; i < rhs.rows(); ++i) {
    if (i == row || alpha(i) == 0.0) continue;
    rhs.row(i) -= alpha(i) * rhs.row(row);
  }
}

}  // namespace mpcert

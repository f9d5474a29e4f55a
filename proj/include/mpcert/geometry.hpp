// SPDX-License-Identifier: Apache-2.0
//
// Parameter-space calculus: affine and quadratic functions of theta, regions
// described by inequalities in theta, and the split / emptiness / comparison
// primitives the certification algorithms are built from.
//
// All types here are immutable values once constructed and can be shared
// freely between threads.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mpcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Tolerances {
  double feas = 1e-9;       // constraint satisfaction
  double value = 1e-8;      // value-function comparisons
  double radius = 1e-8;     // Chebyshev radius below which a region has no interior
  double constant = 1e-10;  // coefficient magnitude treated as zero
  double integrality = 1e-8;  // distance from {0, 1} accepted as integral
};

/// coeffs . theta + offset
class AffineFunction {
 public:
  AffineFunction() = default;
  AffineFunction(Vector coeffs, double offset)
      : coeffs_(std::move(coeffs)), offset_(offset) {}

  static AffineFunction Constant(int dim, double value) {
    return {Vector::Zero(dim), value};
  }

  int dim() const { return static_cast<int>(coeffs_.size()); }
  const Vector& coeffs() const { return coeffs_; }
  double offset() const { return offset_; }

  double operator()(const Vector& theta) const {
    return coeffs_.dot(theta) + offset_;
  }

  bool IsConstant(double tol) const {
    return coeffs_.size() == 0 || coeffs_.lpNorm<Eigen::Infinity>() <= tol;
  }

  AffineFunction operator-() const { return {-coeffs_, -offset_}; }
  AffineFunction operator+(const AffineFunction& o) const {
    return {coeffs_ + o.coeffs_, offset_ + o.offset_};
  }
  AffineFunction operator-(const AffineFunction& o) const {
    return {coeffs_ - o.coeffs_, offset_ - o.offset_};
  }
  AffineFunction operator*(double s) const { return {coeffs_ * s, offset_ * s}; }

 private:
  Vector coeffs_;
  double offset_ = 0.0;
};

/// theta' quad theta + coeffs . theta + offset, with quad symmetric.
class QuadraticFunction {
 public:
  QuadraticFunction() = default;
  QuadraticFunction(const Matrix& quad, Vector coeffs, double offset);
  explicit QuadraticFunction(const AffineFunction& affine);

  int dim() const { return static_cast<int>(coeffs_.size()); }
  const Matrix& quad() const { return quad_; }
  const Vector& coeffs() const { return coeffs_; }
  double offset() const { return offset_; }

  double operator()(const Vector& theta) const {
    return theta.dot(quad_ * theta) + coeffs_.dot(theta) + offset_;
  }
  Vector Gradient(const Vector& theta) const {
    return 2.0 * quad_ * theta + coeffs_;
  }

  bool IsAffine(double tol) const {
    return quad_.size() == 0 || quad_.lpNorm<Eigen::Infinity>() <= tol;
  }
  AffineFunction AffinePart() const { return {coeffs_, offset_}; }

  QuadraticFunction operator-() const;
  QuadraticFunction operator+(const QuadraticFunction& o) const;
  QuadraticFunction operator-(const QuadraticFunction& o) const;

 private:
  Matrix quad_;
  Vector coeffs_;
  double offset_ = 0.0;
};

struct PlusInfinity {};
struct MinusInfinity {};

/// Optimal-value function of a relaxation or incumbent over a region.
class ValueFunction {
 public:
  using Storage =
      std::variant<AffineFunction, QuadraticFunction, PlusInfinity, MinusInfinity>;

  ValueFunction() : v_(PlusInfinity{}) {}
  ValueFunction(AffineFunction f) : v_(std::move(f)) {}
  ValueFunction(QuadraticFunction f) : v_(std::move(f)) {}
  static ValueFunction Plus() { return ValueFunction(PlusInfinity{}); }
  static ValueFunction Minus() { return ValueFunction(MinusInfinity{}); }

  bool IsPlusInfinity() const { return std::holds_alternative<PlusInfinity>(v_); }
  bool IsMinusInfinity() const {
    return std::holds_alternative<MinusInfinity>(v_);
  }
  bool IsFinite() const { return !IsPlusInfinity() && !IsMinusInfinity(); }
  bool IsAffine() const { return std::holds_alternative<AffineFunction>(v_); }
  bool IsQuadratic() const {
    return std::holds_alternative<QuadraticFunction>(v_);
  }
  const AffineFunction& affine() const { return std::get<AffineFunction>(v_); }
  const QuadraticFunction& quadratic() const {
    return std::get<QuadraticFunction>(v_);
  }
  const Storage& storage() const { return v_; }

  /// Finite values are lifted to a quadratic; throws for infinities.
  QuadraticFunction AsQuadratic() const;
  double Evaluate(const Vector& theta) const;

 private:
  explicit ValueFunction(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

/// Vector-valued affine function lin * theta + off.
struct AffineMap {
  Matrix lin;
  Vector off;

  static AffineMap Zero(int rows, int dim) {
    return {Matrix::Zero(rows, dim), Vector::Zero(rows)};
  }
  int rows() const { return static_cast<int>(off.size()); }
  int dim() const { return static_cast<int>(lin.cols()); }
  AffineFunction Row(int i) const { return {lin.row(i).transpose(), off(i)}; }
  Vector operator()(const Vector& theta) const { return lin * theta + off; }
};

struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double Volume() const { return (upper - lower).prod(); }
  bool Contains(const Vector& theta, double tol = 0.0) const;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

/// { theta : g_k(theta) <= 0 for every affine g_k and quadratic q_k }.
///
/// Affine constraints are stored scaled to unit-norm gradients so that
/// -g_k(theta) is the distance to the k-th hyperplane. A region may carry a
/// ball known to lie inside its affine part; it speeds up emptiness tests
/// and never changes their outcome.
class Region {
 public:
  Region() = default;
  explicit Region(int dim) : dim_(dim) {}
  static Region FromBox(const Box& box);

  int dim() const { return dim_; }
  int num_affine() const {
    return dim_ == 0 ? 0 : static_cast<int>(rows_.size()) / (dim_ + 1);
  }
  AffineFunction Affine(int k) const;
  const std::vector<QuadraticFunction>& quadratic() const { return quadratic_; }
  bool has_quadratic() const { return !quadratic_.empty(); }
  int num_constraints() const {
    return num_affine() + static_cast<int>(quadratic_.size());
  }
  const std::optional<Ball>& inscribed() const { return inscribed_; }

  /// Throws std::invalid_argument when theta has the wrong length.
  bool Contains(const Vector& theta, double tol = 1e-9) const;

  /// Smallest distance-like slack over all constraints (negative outside).
  /// Quadratic constraints use -q / |grad q| as a first-order distance.
  double Margin(const Vector& theta) const;

  Region WithAffine(const AffineFunction& g) const;
  Region WithQuadratic(const QuadraticFunction& q) const;
  Region WithAffineConstraints(const std::vector<AffineFunction>& affine) const;
  Region WithInscribed(std::optional<Ball> ball) const;

  /// Stable hash of the constraint data, used to canonicalize partitions.
  std::string Fingerprint() const;

  /// Affine part in matrix form: G theta <= h.
  std::pair<Matrix, Vector> AffineSystem() const;

 private:
  double AffineValue(int k, const Vector& theta) const;

  int dim_ = 0;
  std::vector<double> rows_;  // per constraint: coefficients, then offset
  std::vector<QuadraticFunction> quadratic_;
  std::optional<Ball> inscribed_;
};

enum class Emptiness { kEmpty, kNonEmpty, kUndecided };

struct RegionStatus {
  Emptiness kind = Emptiness::kEmpty;
  Vector witness;  // strictly interior point when kNonEmpty
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Largest inscribed ball of the affine part (nullopt when it is empty).
std::optional<Ball> ChebyshevBall(const Region& region);

/// Bounding box of the affine part; nullopt when that part is empty.
/// Unbounded directions are reported as +-infinity.
std::optional<Box> BoundingBox(const Region& region);

/// Range of a function over a box by interval arithmetic.
Interval IntervalBound(const QuadraticFunction& q, const Box& box);
Interval IntervalBound(const AffineFunction& g, const Box& box);

/// Exact for affine-only regions (empty means no interior). With quadratic
/// constraints: a witness search, then an interval-arithmetic emptiness
/// proof, else kUndecided.
RegionStatus ComputeStatus(const Region& region, const Tolerances& tol = {});

/// Drops affine constraints implied by the others (one LP per constraint).
Region RemoveRedundant(const Region& region, const Tolerances& tol = {});

/// (region with g <= 0, region with -g <= 0). Throws for identically zero g.
std::pair<Region, Region> SplitAffine(const Region& region,
                                      const AffineFunction& g);

/// (region with q <= 0, region with -q <= 0); an affine q degenerates to
/// SplitAffine. Throws for identically zero q.
std::pair<Region, Region> SplitQuadratic(const Region& region,
                                         const QuadraticFunction& q);

struct ValuePiece {
  Region region;
  ValueFunction value;
  int source = 0;  // 0 when the first argument attains the minimum, else 1
};

/// Pointwise minimum of two value functions, splitting the region where the
/// minimizer changes. Pieces with Empty status are dropped.
std::vector<ValuePiece> MinimumOfValueFunctions(const Region& region,
                                                const ValueFunction& a,
                                                const ValueFunction& b,
                                                const Tolerances& tol = {});

/// Pieces of a region on either side of g = 0. A piece is absent when it
/// has no interior; a present piece equals the unsplit region whenever the
/// other side is absent.
struct SignSplit {
  std::optional<Region> nonpositive;  // g <= 0
  std::optional<Region> positive;     // g >= 0
};

/// `bbox` must contain the region; it only serves to skip needless splits.
SignSplit SplitBySign(const Region& region, const Box& bbox,
                      const AffineFunction& g, const Tolerances& tol = {});
SignSplit SplitBySign(const Region& region, const Box& bbox,
                      const QuadraticFunction& q, const Tolerances& tol = {});

/// Argmin with ties going to the earlier entry. Entries i < j are compared by
/// v_i - v_j - tie: i wins when that is <= 0, j wins otherwise. The result
/// is the entry that wins all of its comparisons; when the comparisons are
/// cyclic (only possible within a few tie widths) a left-to-right scan
/// decides. Throws for an empty list.
int ArgminWinner(const std::vector<double>& values, double tie);

struct ArgminCell {
  Region region;
  int winner = 0;  // position in the candidate list
};

/// Parametric ArgminWinner: for each candidate, the part of `region` where
/// it wins every pairwise comparison, dropping cells without interior.
/// Cells are listed in candidate order.
std::vector<ArgminCell> ArgminCells(const Region& region, const Box& bbox,
                                    const std::vector<AffineFunction>& values,
                                    double tie, const Tolerances& tol = {});

/// n_p boxes by repeatedly bisecting the largest box (earliest on ties)
/// along its widest axis (lowest index on ties).
std::vector<Box> BoxPartition(const Box& box, int n_p);

}  // namespace mpcert

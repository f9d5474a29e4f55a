// SPDX-License-Identifier: Apache-2.0

#include "mpcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <boost/random/sobol.hpp>

#include "mpcert/lp.hpp"

namespace mpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Radius cap keeps the Chebyshev LP bounded for unbounded regions.
constexpr double kRadiusCap = 1e3;

// Witness sampling budget for regions with quadratic constraints.
constexpr int kWitnessSamples = 1024;

void CheckDim(const Vector& theta, int dim) {
  if (theta.size() != dim) {
    throw std::invalid_argument("theta has length " +
                                std::to_string(theta.size()) +
                                ", region dimension is " + std::to_string(dim));
  }
}

class Fnv1a {
 public:
  void Add(double v) {
    if (v == 0.0) v = 0.0;  // fold -0.0
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (bits >> (8 * i)) & 0xffu;
      hash_ *= 0x100000001b3ull;
    }
  }
  void Add(int v) { Add(static_cast<double>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

Interval Square(const Interval& x) {
  const double a = x.lo * x.lo;
  const double b = x.hi * x.hi;
  if (x.lo <= 0.0 && x.hi >= 0.0) return {0.0, std::max(a, b)};
  return {std::min(a, b), std::max(a, b)};
}

Interval Product(const Interval& x, const Interval& y) {
  const double c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  Interval r{kInf, -kInf};
  for (double v : c) {
    if (std::isnan(v)) v = 0.0;  // 0 * inf
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

Interval Scale(const Interval& x, double s) {
  if (s == 0.0) return {0.0, 0.0};
  return s > 0.0 ? Interval{s * x.lo, s * x.hi} : Interval{s * x.hi, s * x.lo};
}

// Worst normalized violation; negative means strictly inside.
double Violation(const Region& region, const Vector& theta) {
  double worst = -kInf;
  for (int k = 0; k < region.num_affine(); ++k) {
    worst = std::max(worst, region.Affine(k)(theta));
  }
  for (const auto& q : region.quadratic()) worst = std::max(worst, q(theta));
  return worst;
}

// Coordinate pattern search on the worst violation.
Vector LocalSearch(const Region& region, Vector theta, double step,
                   double* best_value) {
  double best = Violation(region, theta);
  const int dim = region.dim();
  int iterations = 0;
  while (step > 1e-10 && iterations < 400 && best >= 0.0) {
    ++iterations;
    bool improved = false;
    for (int i = 0; i < dim; ++i) {
      for (double dir : {1.0, -1.0}) {
        Vector trial = theta;
        trial(i) += dir * step;
        const double v = Violation(region, trial);
        if (v < best) {
          best = v;
          theta = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  *best_value = best;
  return theta;
}

}  // namespace

// ---------------------------------------------------------------------------
// Functions

QuadraticFunction::QuadraticFunction(const Matrix& quad, Vector coeffs,
                                     double offset)
    : quad_(0.5 * (quad + quad.transpose())),
      coeffs_(std::move(coeffs)),
      offset_(offset) {
  if (quad_.rows() != coeffs_.size() || quad_.cols() != coeffs_.size()) {
    throw std::invalid_argument("QuadraticFunction: dimension mismatch");
  }
}

QuadraticFunction::QuadraticFunction(const AffineFunction& affine)
    : quad_(Matrix::Zero(affine.dim(), affine.dim())),
      coeffs_(affine.coeffs()),
      offset_(affine.offset()) {}

QuadraticFunction QuadraticFunction::operator-() const {
  return {-quad_, -coeffs_, -offset_};
}
QuadraticFunction QuadraticFunction::operator+(const QuadraticFunction& o) const {
  return {quad_ + o.quad_, coeffs_ + o.coeffs_, offset_ + o.offset_};
}
QuadraticFunction QuadraticFunction::operator-(const QuadraticFunction& o) const {
  return {quad_ - o.quad_, coeffs_ - o.coeffs_, offset_ - o.offset_};
}

QuadraticFunction ValueFunction::AsQuadratic() const {
  if (IsAffine()) return QuadraticFunction(affine());
  if (IsQuadratic()) return quadratic();
  throw std::logic_error("ValueFunction::AsQuadratic on an infinite value");
}

double ValueFunction::Evaluate(const Vector& theta) const {
  if (IsPlusInfinity()) return kInf;
  if (IsMinusInfinity()) return -kInf;
  if (IsAffine()) return affine()(theta);
  return quadratic()(theta);
}

bool Box::Contains(const Vector& theta, double tol) const {
  CheckDim(theta, dim());
  for (int i = 0; i < dim(); ++i) {
    if (theta(i) < lower(i) - tol || theta(i) > upper(i) + tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Region

Region Region::FromBox(const Box& box) {
  if (box.lower.size() != box.upper.size()) {
    throw std::invalid_argument("Box: bound lengths differ");
  }
  const int d = box.dim();
  Region region(d);
  region.rows_.assign(static_cast<std::size_t>(2 * d * (d + 1)), 0.0);
  for (int i = 0; i < d; ++i) {
    if (box.lower(i) > box.upper(i)) {
      throw std::invalid_argument("Box: lower exceeds upper");
    }
    double* up = region.rows_.data() + (2 * i) * (d + 1);
    double* lo = up + (d + 1);
    up[i] = 1.0;
    up[d] = -box.upper(i);
    lo[i] = -1.0;
    lo[d] = box.lower(i);
  }
  if (d > 0 && box.upper.allFinite() && box.lower.allFinite()) {
    region.inscribed_ =
        Ball{0.5 * (box.lower + box.upper), 0.5 * (box.upper - box.lower).minCoeff()};
  }
  return region;
}

AffineFunction Region::Affine(int k) const {
  const double* r = rows_.data() + k * (dim_ + 1);
  return {Eigen::Map<const Vector>(r, dim_), r[dim_]};
}

double Region::AffineValue(int k, const Vector& theta) const {
  const double* r = rows_.data() + k * (dim_ + 1);
  return Eigen::Map<const Vector>(r, dim_).dot(theta) + r[dim_];
}

bool Region::Contains(const Vector& theta, double tol) const {
  CheckDim(theta, dim_);
  for (int k = 0; k < num_affine(); ++k) {
    if (AffineValue(k, theta) > tol) return false;
  }
  for (const auto& q : quadratic_) {
    if (q(theta) > tol) return false;
  }
  return true;
}

double Region::Margin(const Vector& theta) const {
  CheckDim(theta, dim_);
  double margin = kInf;
  for (int k = 0; k < num_affine(); ++k) {
    margin = std::min(margin, -AffineValue(k, theta));
  }
  for (const auto& q : quadratic_) {
    const double grad = q.Gradient(theta).norm();
    const double value = -q(theta);
    margin = std::min(margin, grad > 1e-12 ? value / grad : value);
  }
  return margin;
}

Region Region::WithAffine(const AffineFunction& g) const {
  if (g.dim() != dim_) throw std::invalid_argument("WithAffine: dimension");
  Region out(dim_);
  out.rows_.reserve(rows_.size() + dim_ + 1);
  out.rows_ = rows_;
  const double norm = g.coeffs().norm();
  const double s = norm > 0.0 ? 1.0 / norm : 1.0;
  for (int i = 0; i < dim_; ++i) out.rows_.push_back(s * g.coeffs()(i));
  out.rows_.push_back(s * g.offset());
  out.quadratic_ = quadratic_;
  return out;
}

Region Region::WithQuadratic(const QuadraticFunction& q) const {
  if (q.dim() != dim_) throw std::invalid_argument("WithQuadratic: dimension");
  Region out = *this;
  out.quadratic_.push_back(q);
  return out;
}

Region Region::WithAffineConstraints(
    const std::vector<AffineFunction>& affine) const {
  Region out(dim_);
  out.quadratic_ = quadratic_;
  out.rows_.reserve(affine.size() * (dim_ + 1));
  for (const auto& g : affine) {
    for (int i = 0; i < dim_; ++i) out.rows_.push_back(g.coeffs()(i));
    out.rows_.push_back(g.offset());
  }
  return out;
}

Region Region::WithInscribed(std::optional<Ball> ball) const {
  Region out = *this;
  out.inscribed_ = std::move(ball);
  return out;
}

std::string Region::Fingerprint() const {
  Fnv1a h;
  h.Add(dim_);
  h.Add(num_affine());
  for (double v : rows_) h.Add(v);
  h.Add(static_cast<int>(quadratic_.size()));
  for (const auto& q : quadratic_) {
    for (int i = 0; i < q.quad().size(); ++i) h.Add(q.quad().data()[i]);
    for (int i = 0; i < q.dim(); ++i) h.Add(q.coeffs()(i));
    h.Add(q.offset());
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h.value()));
  return buf;
}

std::pair<Matrix, Vector> Region::AffineSystem() const {
  const int k = num_affine();
  Matrix G(k, dim_);
  Vector h(k);
  for (int j = 0; j < k; ++j) {
    const double* r = rows_.data() + j * (dim_ + 1);
    G.row(j) = Eigen::Map<const Eigen::RowVectorXd>(r, dim_);
    h(j) = -r[dim_];
  }
  return {std::move(G), std::move(h)};
}

// ---------------------------------------------------------------------------
// LP-backed queries

std::optional<Ball> ChebyshevBall(const Region& region) {
  const int d = region.dim();
  auto [G, h] = region.AffineSystem();
  const int k = static_cast<int>(G.rows());
  Matrix Gc(k + 1, d + 1);
  Vector hc(k + 1);
  Gc.setZero();
  for (int j = 0; j < k; ++j) {
    Gc.row(j).head(d) = G.row(j);
    Gc(j, d) = G.row(j).norm();
    hc(j) = h(j);
  }
  Gc(k, d) = 1.0;
  hc(k) = kRadiusCap;
  Vector c = Vector::Zero(d + 1);
  c(d) = 1.0;
  const lp::LpResult res = lp::Maximize(c, Gc, hc);
  if (res.status != lp::LpStatus::kOptimal) return std::nullopt;
  if (res.point(d) < 0.0) return std::nullopt;
  return Ball{res.point.head(d), res.point(d)};
}

std::optional<Box> BoundingBox(const Region& region) {
  const int d = region.dim();
  auto [G, h] = region.AffineSystem();
  Box box{Vector(d), Vector(d)};
  for (int i = 0; i < d; ++i) {
    Vector c = Vector::Zero(d);
    c(i) = 1.0;
    lp::LpResult hi = lp::Maximize(c, G, h);
    if (hi.status == lp::LpStatus::kInfeasible) return std::nullopt;
    box.upper(i) = hi.status == lp::LpStatus::kOptimal ? hi.value : kInf;
    lp::LpResult lo = lp::Maximize(-c, G, h);
    if (lo.status == lp::LpStatus::kInfeasible) return std::nullopt;
    box.lower(i) = lo.status == lp::LpStatus::kOptimal ? -lo.value : -kInf;
  }
  return box;
}

Interval IntervalBound(const QuadraticFunction& q, const Box& box) {
  const int d = q.dim();
  Interval total{q.offset(), q.offset()};
  std::vector<Interval> x(d);
  for (int i = 0; i < d; ++i) x[i] = {box.lower(i), box.upper(i)};
  auto add = [&total](const Interval& v) {
    total.lo += v.lo;
    total.hi += v.hi;
  };
  for (int i = 0; i < d; ++i) {
    add(Scale(x[i], q.coeffs()(i)));
    add(Scale(Square(x[i]), q.quad()(i, i)));
    for (int j = i + 1; j < d; ++j) {
      add(Scale(Product(x[i], x[j]), 2.0 * q.quad()(i, j)));
    }
  }
  return total;
}

Interval IntervalBound(const AffineFunction& g, const Box& box) {
  Interval total{g.offset(), g.offset()};
  for (int i = 0; i < g.dim(); ++i) {
    const Interval v = Scale({box.lower(i), box.upper(i)}, g.coeffs()(i));
    total.lo += v.lo;
    total.hi += v.hi;
  }
  return total;
}

RegionStatus ComputeStatus(const Region& region, const Tolerances& tol) {
  std::optional<Ball> ball = region.inscribed();
  if (!ball || ball->radius <= tol.radius) ball = ChebyshevBall(region);
  if (!ball || ball->radius <= tol.radius) return {Emptiness::kEmpty, {}};
  if (!region.has_quadratic()) return {Emptiness::kNonEmpty, ball->center};

  // (a) Chebyshev center, (b) local search from it.
  double value = Violation(region, ball->center);
  if (value < -tol.feas) return {Emptiness::kNonEmpty, ball->center};
  Vector theta = LocalSearch(region, ball->center, ball->radius, &value);
  if (value < -tol.feas) return {Emptiness::kNonEmpty, theta};

  // (c) Low-discrepancy samples over the bounding box of the affine part.
  const std::optional<Box> box = BoundingBox(region);
  if (!box) return {Emptiness::kEmpty, {}};
  const int d = region.dim();
  boost::random::sobol engine(d);
  const double scale = 1.0 / 4294967296.0;
  Vector best_point = ball->center;
  double best_value = kInf;
  Vector sample(d);
  for (int s = 0; s < kWitnessSamples; ++s) {
    for (int i = 0; i < d; ++i) {
      const double u = (static_cast<double>(engine()) + 0.5) * scale;
      const double lo = std::isfinite(box->lower(i)) ? box->lower(i)
                                                     : ball->center(i) - 1.0;
      const double hi = std::isfinite(box->upper(i)) ? box->upper(i)
                                                     : ball->center(i) + 1.0;
      sample(i) = lo + u * (hi - lo);
    }
    const double v = Violation(region, sample);
    if (v < best_value) {
      best_value = v;
      best_point = sample;
    }
    if (v < -tol.feas) return {Emptiness::kNonEmpty, sample};
  }
  theta = LocalSearch(region, best_point, 0.1 * (box->upper - box->lower).maxCoeff(),
                      &value);
  if (value < -tol.feas) return {Emptiness::kNonEmpty, theta};

  // Emptiness proof: some quadratic constraint is positive over the box.
  for (const auto& q : region.quadratic()) {
    if (IntervalBound(q, *box).lo > tol.feas) return {Emptiness::kEmpty, {}};
  }
  return {Emptiness::kUndecided, {}};
}

Region RemoveRedundant(const Region& region, const Tolerances& tol) {
  std::vector<AffineFunction> kept;
  kept.reserve(region.num_affine());
  for (int k = 0; k < region.num_affine(); ++k) kept.push_back(region.Affine(k));
  const int d = region.dim();
  for (int k = static_cast<int>(kept.size()) - 1; k >= 0; --k) {
    const int rows = static_cast<int>(kept.size()) - 1;
    Matrix G(rows, d);
    Vector h(rows);
    int r = 0;
    for (int j = 0; j < static_cast<int>(kept.size()); ++j) {
      if (j == k) continue;
      G.row(r) = kept[j].coeffs().transpose();
      h(r) = -kept[j].offset();
      ++r;
    }
    const lp::LpResult res = lp::Maximize(kept[k].coeffs(), G, h);
    if (res.status == lp::LpStatus::kOptimal &&
        res.value + kept[k].offset() <= tol.feas) {
      kept.erase(kept.begin() + k);
    }
  }
  Region out = region.WithAffineConstraints(kept);
  return out.WithInscribed(region.inscribed());
}

// ---------------------------------------------------------------------------
// Splits

std::pair<Region, Region> SplitAffine(const Region& region,
                                      const AffineFunction& g) {
  if (g.coeffs().norm() + std::abs(g.offset()) == 0.0) {
    throw std::invalid_argument("SplitAffine: identically zero function");
  }
  return {region.WithAffine(g), region.WithAffine(-g)};
}

std::pair<Region, Region> SplitQuadratic(const Region& region,
                                         const QuadraticFunction& q) {
  if (q.IsAffine(0.0)) return SplitAffine(region, q.AffinePart());
  return {region.WithQuadratic(q), region.WithQuadratic(-q)};
}

std::vector<ValuePiece> MinimumOfValueFunctions(const Region& region,
                                                const ValueFunction& a,
                                                const ValueFunction& b,
                                                const Tolerances& tol) {
  if (a.IsMinusInfinity() && b.IsMinusInfinity()) {
    throw std::invalid_argument(
        "MinimumOfValueFunctions: both arguments are -infinity");
  }
  if (a.IsMinusInfinity()) return {{region, a, 0}};
  if (b.IsMinusInfinity()) return {{region, b, 1}};
  if (b.IsPlusInfinity()) return {{region, a, 0}};
  if (a.IsPlusInfinity()) return {{region, b, 1}};

  const QuadraticFunction diff = a.AsQuadratic() - b.AsQuadratic();
  const bool affine = diff.IsAffine(tol.constant);
  if (affine && diff.AffinePart().IsConstant(tol.constant)) {
    return diff.offset() <= tol.value ? std::vector<ValuePiece>{{region, a, 0}}
                                      : std::vector<ValuePiece>{{region, b, 1}};
  }
  auto [a_side, b_side] = affine ? SplitAffine(region, diff.AffinePart())
                                 : SplitQuadratic(region, diff);
  std::vector<ValuePiece> pieces;
  if (ComputeStatus(a_side, tol).kind != Emptiness::kEmpty) {
    pieces.push_back({std::move(a_side), a, 0});
  }
  if (ComputeStatus(b_side, tol).kind != Emptiness::kEmpty) {
    pieces.push_back({std::move(b_side), b, 1});
  }
  return pieces;
}

SignSplit SplitBySign(const Region& region, const Box& bbox,
                      const AffineFunction& g, const Tolerances& tol) {
  if (g.IsConstant(tol.constant)) {
    if (g.offset() <= 0.0) return {region, std::nullopt};
    return {std::nullopt, region};
  }
  const Interval range = IntervalBound(g, bbox);
  if (range.hi <= 0.0) return {region, std::nullopt};
  if (range.lo > 0.0) return {std::nullopt, region};

  std::optional<Ball> ball = region.inscribed();
  if (!ball) ball = ChebyshevBall(region);
  if (!ball || ball->radius <= tol.radius) {
    // The region itself is a sliver: keep it whole on the side of its center.
    if (ball && g(ball->center) > 0.0) return {std::nullopt, region};
    return {region, std::nullopt};
  }

  // The half holding the known center keeps an inscribed ball of radius at
  // least half the current one; only the other half needs an LP.
  const double norm = g.coeffs().norm();
  const Vector a = g.coeffs() / norm;
  const double s = g(ball->center) / norm;
  const bool center_nonpositive = s <= 0.0;
  const double depth = std::abs(s);
  Ball near = *ball;
  if (depth < ball->radius) {
    near.radius = 0.5 * (ball->radius + depth);
    const double shift = 0.5 * (ball->radius - depth);
    near.center = center_nonpositive ? Vector(ball->center - shift * a)
                                     : Vector(ball->center + shift * a);
  }
  Region far = center_nonpositive ? region.WithAffine(-g) : region.WithAffine(g);
  std::optional<Ball> far_ball = ChebyshevBall(far);
  if (!far_ball || far_ball->radius <= tol.radius) {
    Region whole = region.inscribed() ? region : region.WithInscribed(ball);
    if (center_nonpositive) return {std::move(whole), std::nullopt};
    return {std::nullopt, std::move(whole)};
  }
  far = far.WithInscribed(std::move(far_ball));
  Region near_region =
      (center_nonpositive ? region.WithAffine(g) : region.WithAffine(-g))
          .WithInscribed(std::move(near));
  if (center_nonpositive) return {std::move(near_region), std::move(far)};
  return {std::move(far), std::move(near_region)};
}

SignSplit SplitBySign(const Region& region, const Box& bbox,
                      const QuadraticFunction& q, const Tolerances& tol) {
  if (q.IsAffine(tol.constant)) {
    return SplitBySign(region, bbox, q.AffinePart(), tol);
  }
  const Interval range = IntervalBound(q, bbox);
  if (range.hi <= 0.0) return {region, std::nullopt};
  if (range.lo > 0.0) return {std::nullopt, region};
  Region neg = region.WithQuadratic(q);
  Region pos = region.WithQuadratic(-q);
  const bool neg_ok = ComputeStatus(neg, tol).kind != Emptiness::kEmpty;
  const bool pos_ok = ComputeStatus(pos, tol).kind != Emptiness::kEmpty;
  if (neg_ok && pos_ok) return {std::move(neg), std::move(pos)};
  if (neg_ok) return {region, std::nullopt};
  if (pos_ok) return {std::nullopt, region};
  const std::optional<Ball> ball = ChebyshevBall(region);
  if (ball && q(ball->center) > 0.0) return {std::nullopt, region};
  return {region, std::nullopt};
}

int ArgminWinner(const std::vector<double>& values, double tie) {
  const int k = static_cast<int>(values.size());
  if (k == 0) throw std::invalid_argument("ArgminWinner: no candidates");
  int scan = 0;
  for (int j = 1; j < k; ++j) {
    if (values[scan] - values[j] - tie > 0.0) scan = j;
  }
  auto beats_all = [&](int d) {
    for (int j = 0; j < k; ++j) {
      if (j < d && !(values[j] - values[d] - tie > 0.0)) return false;
      if (j > d && !(values[d] - values[j] - tie <= 0.0)) return false;
    }
    return true;
  };
  // The scan winner beats every later entry, so it is the answer unless it
  // lost to an earlier one.
  if (beats_all(scan)) return scan;
  for (int d = 0; d < k; ++d) {
    if (beats_all(d)) return d;
  }
  return scan;
}

namespace {

// Cells of `region` won by members of `alive`; the others are known to lose
// somewhere on every point of `region`.
void ArgminCellsRec(const Region& region, const Box& bbox,
                    const std::vector<AffineFunction>& values, double tie,
                    const Tolerances& tol, std::vector<bool> alive,
                    std::vector<ArgminCell>* out) {
  const int k = static_cast<int>(values.size());
  const int dim = region.dim();
  std::optional<Ball> ball = region.inscribed();
  if (!ball) ball = ChebyshevBall(region);
  int d = -1;
  if (ball) {
    std::vector<double> at(k);
    for (int j = 0; j < k; ++j) at[j] = values[j](ball->center);
    d = ArgminWinner(at, tie);
  }
  if (d < 0 || !alive[d]) {
    d = -1;
    for (int j = 0; j < k && d < 0; ++j) {
      if (alive[j]) d = j;
    }
  }
  if (d < 0) {
    // Numerically cyclic comparisons: keep the region whole.
    out->push_back({region, 0});
    return;
  }
  Region rest = ball && !region.inscribed() ? region.WithInscribed(ball) : region;
  const Box& rest_box = bbox;
  std::vector<bool> sub = alive;
  sub[d] = false;
  for (int j = 0; j < k; ++j) {
    if (j == d) continue;
    // "d beats j" as g <= 0; constant comparisons use the pointwise predicate.
    AffineFunction g = j < d ? values[d] - values[j] + AffineFunction::Constant(dim, tie)
                             : values[d] - values[j] - AffineFunction::Constant(dim, tie);
    if (g.IsConstant(tol.constant)) {
      const bool wins = j < d ? g.offset() < 0.0 : g.offset() <= 0.0;
      if (wins) continue;
      ArgminCellsRec(rest, rest_box, values, tie, tol, sub, out);
      return;
    }
    SignSplit split = SplitBySign(rest, rest_box, g, tol);
    if (split.positive) {
      ArgminCellsRec(*split.positive, rest_box, values, tie, tol, sub, out);
    }
    if (!split.nonpositive) return;
    rest = std::move(*split.nonpositive);
  }
  out->push_back({std::move(rest), d});
}

}  // namespace

std::vector<ArgminCell> ArgminCells(const Region& region, const Box& bbox,
                                    const std::vector<AffineFunction>& values,
                                    double tie, const Tolerances& tol) {
  const int k = static_cast<int>(values.size());
  if (k == 0) throw std::invalid_argument("ArgminCells: no candidates");
  if (k == 1) return {{region, 0}};
  std::vector<ArgminCell> cells;
  ArgminCellsRec(region, bbox, values, tie, tol, std::vector<bool>(k, true), &cells);
  return cells;
}

std::vector<Box> BoxPartition(const Box& box, int n_p) {
  if (n_p < 1) throw std::invalid_argument("BoxPartition: n_p must be >= 1");
  if (box.lower.size() != box.upper.size() || box.dim() == 0) {
    throw std::invalid_argument("BoxPartition: malformed box");
  }
  std::vector<Box> boxes{box};  // kept in creation order
  while (static_cast<int>(boxes.size()) < n_p) {
    std::size_t pick = 0;
    double best = boxes[0].Volume();
    for (std::size_t i = 1; i < boxes.size(); ++i) {
      const double v = boxes[i].Volume();
      if (v > best * (1.0 + 1e-12)) {
        best = v;
        pick = i;
      }
    }
    const Box parent = boxes[pick];
    const Vector width = parent.upper - parent.lower;
    int axis = 0;
    for (int i = 1; i < parent.dim(); ++i) {
      if (width(i) > width(axis) * (1.0 + 1e-12)) axis = i;
    }
    const double mid = 0.5 * (parent.lower(axis) + parent.upper(axis));
    Box low = parent;
    Box high = parent;
    low.upper(axis) = mid;
    high.lower(axis) = mid;
    boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(pick));
    boxes.push_back(std::move(low));
    boxes.push_back(std::move(high));
  }
  return boxes;
}

}  // namespace mpcert

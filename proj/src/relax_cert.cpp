// SPDX-License-Identifier: Apache-2.0

#include "mpcert/relax_cert.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace mpcert {

void CheckDeadline(const CertOptions& options) {
  if (options.deadline && std::chrono::steady_clock::now() > *options.deadline) {
    throw DeadlineExceeded();
  }
}

namespace {

// Runs `step` on queued items (last in, first out) until none remain or the
// pause threshold is reached; leftover items become unfinished outputs.
template <class Item, class Engine>
std::vector<CertRegionOut> Drive(std::vector<Item> queue, Engine& engine,
                                 const CertOptions& opt) {
  std::vector<CertRegionOut> out;
  while (!queue.empty()) {
    CheckDeadline(opt);
    Item item = std::move(queue.back());
    queue.pop_back();
    std::vector<Item> children;
    engine.Step(item, children, out);
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      queue.push_back(std::move(*it));
    }
    if (opt.n_max && !queue.empty() &&
        static_cast<int>(out.size() + queue.size()) >= *opt.n_max) {
      break;
    }
  }
  for (const Item& item : queue) out.push_back(engine.Pause(item));
  return out;
}

AffineFunction RowOf(const Matrix& block, int i) {
  return {block.row(i).tail(block.cols() - 1).transpose(), block(i, 0)};
}

void AddScaled(AffineMap& map, const Vector& dir, const AffineFunction& t) {
  map.lin += dir * t.coeffs().transpose();
  map.off += dir * t.offset();
}

void CheckCap(int iterations, int cap, const Region& region) {
  if (iterations > cap) {
    throw std::runtime_error("iteration cap " + std::to_string(cap) +
                             " exceeded in region " + region.Fingerprint());
  }
}

// ---------------------------------------------------------------------------
// Simplex engine

struct LpItem {
  Region region;
  Box bbox;
  int iterations = 0;
  int credited = 0;
  int cursor = 0;
  std::vector<int> partial;  // initial basis, complete once cursor reaches the end
  std::vector<std::pair<int, int>> pivots;
  std::optional<BasisFactor> factor;
  Matrix rhs;  // basic values: column 0 offset, then theta coefficients
};

class LpEngine {
 public:
  LpEngine(const Relaxation& relax, const CertOptions& opt)
      : relax_(relax), opt_(opt), form_(relax, opt.simplex.big_m) {
    block_.resize(relax.num_rows(), 1 + relax.theta_dim());
    block_.col(0) = relax.b;
    block_.rightCols(relax.theta_dim()) = relax.W;
  }

  LpItem Start(const Region& region, const Box& bbox,
               const EngineState* resume) const {
    LpItem item;
    item.region = region;
    item.bbox = bbox;
    if (resume) {
      item.iterations = item.credited = resume->iterations;
      item.partial = resume->basis;
      if (resume->cursor >= 0) {
        item.cursor = resume->cursor;
      } else {
        item.cursor = form_.rows();
        item.pivots = resume->pivots;
      }
    }
    return item;
  }

  void Step(LpItem& item, std::vector<LpItem>& children,
            std::vector<CertRegionOut>& out) const {
    Compact(item);
    if (!item.factor) {
      while (item.cursor < form_.rows()) {
        const int i = item.cursor;
        const AffineFunction h(-relax_.W.row(i).transpose(),
                               -relax_.b(i) - opt_.tol.feas);
        SignSplit s = SplitBySign(item.region, item.bbox, h, opt_.tol);
        if (s.nonpositive && s.positive) {
          LpItem slack = item;
          slack.region = std::move(*s.nonpositive);
          slack.partial.push_back(form_.SlackColumn(i));
          ++slack.cursor;
          LpItem art = std::move(item);
          art.region = std::move(*s.positive);
          art.partial.push_back(form_.ArtificialColumn(i));
          ++art.cursor;
          children.push_back(std::move(slack));
          children.push_back(std::move(art));
          return;
        }
        item.partial.push_back(form_.InitialColumn(i, s.nonpositive.has_value()));
        ++item.cursor;
      }
      item.factor.emplace(form_, item.partial);
      item.rhs = item.factor->inverse() * block_;
      if (!item.pivots.empty()) {
        // Resumed: replay the recorded pivots from the initial basis.
        const std::vector<std::pair<int, int>> replay = std::move(item.pivots);
        item.pivots.clear();
        item.iterations -= static_cast<int>(replay.size());
        for (const auto& [row, col] : replay) {
          ApplyPivot(item, row, col, item.factor->Column(col));
        }
      }
    }

    const SimplexOptions& so = opt_.simplex;
    for (;;) {
      CheckCap(item.iterations, so.pivot_cap, item.region);
      const bool bland = item.iterations >= so.bland_after;
      const int enter = item.factor->Entering(bland, so.cost_tol);
      if (enter < 0) {
        Finish(item, out);
        return;
      }
      const Vector alpha = item.factor->Column(enter);
      std::vector<int> cand;
      for (int i = 0; i < alpha.size(); ++i) {
        if (alpha(i) > so.pivot_tol) cand.push_back(i);
      }
      if (cand.empty()) {
        out.push_back(Output(item, item.region, ValueFunction::Minus(), {}));
        return;
      }
      std::vector<AffineFunction> ratios;
      ratios.reserve(cand.size());
      for (int c : cand) ratios.push_back(RowOf(item.rhs, c) * (1.0 / alpha(c)));
      std::vector<ArgminCell> pieces =
          ArgminCells(item.region, item.bbox, ratios, so.tie_tol, opt_.tol);
      if (pieces.size() == 1) {
        item.region = std::move(pieces[0].region);
        ApplyPivot(item, cand[pieces[0].winner], enter, alpha);
        continue;
      }
      for (ArgminCell& piece : pieces) {
        LpItem child = item;
        child.region = std::move(piece.region);
        ApplyPivot(child, cand[piece.winner], enter, alpha);
        children.push_back(std::move(child));
      }
      return;
    }
  }

  CertRegionOut Pause(const LpItem& item) const {
    EngineState state;
    state.kind = ProblemKind::kMilp;
    state.iterations = item.iterations;
    if (item.factor) {
      state.cursor = -1;
      state.basis = item.partial;
      state.pivots = item.pivots;
    } else {
      state.cursor = item.cursor;
      state.basis = item.partial;
    }
    CertRegionOut out;
    out.region = item.region;
    out.iterations = item.iterations - item.credited;
    out.finished = false;
    out.state = std::move(state);
    return out;
  }

 private:
  void Compact(LpItem& item) const {
    if (opt_.compact_threshold > 0 &&
        item.region.num_constraints() > opt_.compact_threshold) {
      item.region = RemoveRedundant(item.region, opt_.tol);
      if (auto box = BoundingBox(item.region)) item.bbox = *box;
    }
  }

  void ApplyPivot(LpItem& item, int row, int col, const Vector& alpha) const {
    item.factor->Pivot(row, col, alpha);
    PivotRows(item.rhs, alpha, row);
    item.pivots.emplace_back(row, col);
    ++item.iterations;
    if (item.iterations % opt_.simplex.refactor_every == 0) {
      item.factor->Refactor();
      item.rhs = item.factor->inverse() * block_;
    }
  }

  void Finish(const LpItem& item, std::vector<CertRegionOut>& out) const {
    Region rest = item.region;
    const std::vector<int>& basis = item.factor->basis();
    for (int i = 0; i < form_.rows(); ++i) {
      if (!form_.IsArtificial(basis[i])) continue;
      const AffineFunction h =
          RowOf(item.rhs, i) -
          AffineFunction::Constant(relax_.theta_dim(), opt_.tol.feas);
      SignSplit s = SplitBySign(rest, item.bbox, h, opt_.tol);
      if (s.positive) {
        out.push_back(Output(item, std::move(*s.positive), ValueFunction::Plus(), {}));
      }
      if (!s.nonpositive) return;
      rest = std::move(*s.nonpositive);
    }
    const int n = relax_.num_vars();
    AffineMap x = AffineMap::Zero(n, relax_.theta_dim());
    const auto rows = item.factor->StructuralRows();
    for (int k = 0; k < n; ++k) {
      if (rows[k].first >= 0) {
        x.off(k) += item.rhs(rows[k].first, 0);
        x.lin.row(k) += item.rhs.row(rows[k].first).tail(x.dim());
      }
      if (rows[k].second >= 0) {
        x.off(k) -= item.rhs(rows[k].second, 0);
        x.lin.row(k) -= item.rhs.row(rows[k].second).tail(x.dim());
      }
    }
    out.push_back(Output(item, std::move(rest), LpValue(relax_, x), relax_.Lift(x)));
  }

  CertRegionOut Output(const LpItem& item, Region region, ValueFunction lower,
                       std::vector<AffineFunction> optimizer) const {
    CertRegionOut out;
    out.region = std::move(region);
    out.lower = std::move(lower);
    out.optimizer = std::move(optimizer);
    out.iterations = item.iterations - item.credited;
    return out;
  }

  const Relaxation& relax_;
  const CertOptions& opt_;
  BigMForm form_;
  Matrix block_;
};

// ---------------------------------------------------------------------------
// Dual active-set engine

struct QpItem {
  Region region;
  Box bbox;
  int iterations = 0;
  int credited = 0;
  std::vector<int> active;
  AffineMap x;
  AffineMap u;
  int adding = -1;
  AffineFunction u_adding;
};

class QpEngine {
 public:
  QpEngine(const Relaxation& relax, const CertOptions& opt)
      : relax_(relax), opt_(opt), kernel_(relax, opt.dual) {}

  QpItem Start(const Region& region, const Box& bbox,
               const EngineState* resume) const {
    QpItem item;
    item.region = region;
    item.bbox = bbox;
    const int d = relax_.theta_dim();
    if (resume) {
      item.iterations = item.credited = resume->iterations;
      item.active = resume->working_set;
      item.x = resume->x;
      item.u = resume->u;
      item.adding = resume->adding;
      item.u_adding = resume->u_adding;
    } else {
      item.x = kernel_.UnconstrainedMinimizer();
      item.u = AffineMap::Zero(0, d);
      item.u_adding = AffineFunction::Constant(d, 0.0);
    }
    return item;
  }

  void Step(QpItem& item, std::vector<QpItem>& children,
            std::vector<CertRegionOut>& out) const {
    Compact(item);
    const int d = relax_.theta_dim();
    for (;;) {
      CheckCap(item.iterations, opt_.dual.iteration_cap, item.region);
      if (item.adding < 0) {
        std::vector<std::pair<Region, int>> pieces;
        std::optional<Region> rest = item.region;
        for (int i = 0; i < relax_.num_rows() && rest; ++i) {
          if (std::find(item.active.begin(), item.active.end(), i) !=
              item.active.end()) {
            continue;
          }
          const AffineFunction h =
              -Slack(item.x, i) - AffineFunction::Constant(d, opt_.tol.feas);
          SignSplit s = SplitBySign(*rest, item.bbox, h, opt_.tol);
          if (s.positive) pieces.emplace_back(std::move(*s.positive), i);
          rest = std::move(s.nonpositive);
        }
        if (rest) out.push_back(Optimal(item, std::move(*rest)));
        if (pieces.empty()) return;
        if (pieces.size() == 1 && !rest) {
          item.adding = pieces[0].second;
          item.u_adding = AffineFunction::Constant(d, 0.0);
          continue;
        }
        for (auto& [region, i] : pieces) {
          QpItem child = item;
          child.region = std::move(region);
          child.adding = i;
          child.u_adding = AffineFunction::Constant(d, 0.0);
          children.push_back(std::move(child));
        }
        return;
      }

      const int p = item.adding;
      const DualStep step = kernel_.Step(item.active, p);
      struct Piece {
        Region region;
        int block;  // position in the working set, -1 for none
      };
      std::vector<Piece> pieces;
      if (step.blocking.empty()) {
        pieces.push_back({item.region, -1});
      } else {
        std::vector<AffineFunction> steps;
        steps.reserve(step.blocking.size());
        for (int j : step.blocking) steps.push_back(BlockingStep(item, step, j));
        for (ArgminCell& cell : ArgminCells(item.region, item.bbox, steps,
                                            opt_.dual.tie_tol, opt_.tol)) {
          pieces.push_back({std::move(cell.region), step.blocking[cell.winner]});
        }
      }

      // Resolve full step (block = -2), partial step, or infeasibility (-3).
      constexpr int kFull = -2;
      constexpr int kInfeasible = -3;
      std::vector<Piece> actions;
      std::optional<AffineFunction> full_step;
      if (!step.zero_direction) full_step = Slack(item.x, p) * (1.0 / step.slope);
      for (Piece& piece : pieces) {
        if (step.zero_direction) {
          actions.push_back({std::move(piece.region),
                             piece.block < 0 ? kInfeasible : piece.block});
          continue;
        }
        if (piece.block < 0) {
          actions.push_back({std::move(piece.region), kFull});
          continue;
        }
        const AffineFunction h = *full_step - BlockingStep(item, step, piece.block) -
                                 AffineFunction::Constant(d, opt_.dual.tie_tol);
        SignSplit s = SplitBySign(piece.region, item.bbox, h, opt_.tol);
        if (s.nonpositive) actions.push_back({std::move(*s.nonpositive), kFull});
        if (s.positive) actions.push_back({std::move(*s.positive), piece.block});
      }

      auto apply = [&](QpItem& target, int action) {
        if (action == kFull) {
          const AffineFunction& t = *full_step;
          AddScaled(target.x, step.z, t);
          AddScaled(target.u, step.r, t);
          target.u_adding = target.u_adding + t;
          target.active.push_back(p);
          AffineMap u = AffineMap::Zero(target.u.rows() + 1, d);
          u.lin.topRows(target.u.rows()) = target.u.lin;
          u.off.head(target.u.rows()) = target.u.off;
          u.lin.bottomRows(1) = target.u_adding.coeffs().transpose();
          u.off(target.u.rows()) = target.u_adding.offset();
          target.u = std::move(u);
          target.adding = -1;
        } else {
          const AffineFunction t = BlockingStep(target, step, action);
          AddScaled(target.x, step.z, t);
          AddScaled(target.u, step.r, t);
          target.u_adding = target.u_adding + t;
          target.active.erase(target.active.begin() + action);
          AffineMap u = AffineMap::Zero(target.u.rows() - 1, d);
          for (int j = 0, r = 0; j < target.u.rows(); ++j) {
            if (j == action) continue;
            u.lin.row(r) = target.u.lin.row(j);
            u.off(r) = target.u.off(j);
            ++r;
          }
          target.u = std::move(u);
        }
        ++target.iterations;
      };

      if (actions.size() == 1 && actions[0].block != kInfeasible) {
        apply(item, actions[0].block);
        continue;
      }
      for (Piece& a : actions) {
        if (a.block == kInfeasible) {
          out.push_back(Output(item, std::move(a.region), ValueFunction::Plus(), {}));
          continue;
        }
        QpItem child = item;
        child.region = std::move(a.region);
        apply(child, a.block);
        children.push_back(std::move(child));
      }
      return;
    }
  }

  CertRegionOut Pause(const QpItem& item) const {
    EngineState state;
    state.kind = ProblemKind::kMiqp;
    state.iterations = item.iterations;
    state.cursor = -1;
    state.working_set = item.active;
    state.x = item.x;
    state.u = item.u;
    state.adding = item.adding;
    state.u_adding = item.u_adding;
    CertRegionOut out;
    out.region = item.region;
    out.iterations = item.iterations - item.credited;
    out.finished = false;
    out.state = std::move(state);
    return out;
  }

 private:
  void Compact(QpItem& item) const {
    if (opt_.compact_threshold > 0 &&
        item.region.num_constraints() > opt_.compact_threshold) {
      item.region = RemoveRedundant(item.region, opt_.tol);
      if (auto box = BoundingBox(item.region)) item.bbox = *box;
    }
  }

  // b_i(theta) - a_i'x(theta)
  AffineFunction Slack(const AffineMap& x, int i) const {
    const Vector a = relax_.A.row(i).transpose();
    return {relax_.W.row(i).transpose() - x.lin.transpose() * a,
            relax_.b(i) - a.dot(x.off)};
  }

  // Step length at which multiplier j of the working set reaches zero.
  static AffineFunction BlockingStep(const QpItem& item, const DualStep& step,
                                     int j) {
    return item.u.Row(j) * (1.0 / -step.r(j));
  }

  CertRegionOut Optimal(const QpItem& item, Region region) const {
    return Output(item, std::move(region), QpValue(relax_, item.x),
                  relax_.Lift(item.x));
  }

  CertRegionOut Output(const QpItem& item, Region region, ValueFunction lower,
                       std::vector<AffineFunction> optimizer) const {
    CertRegionOut out;
    out.region = std::move(region);
    out.lower = std::move(lower);
    out.optimizer = std::move(optimizer);
    out.iterations = item.iterations - item.credited;
    return out;
  }

  const Relaxation& relax_;
  const CertOptions& opt_;
  DualActiveSetKernel kernel_;
};

template <class Engine>
std::vector<CertRegionOut> Run(const Relaxation& relax, const Region& region,
                               const EngineState* resume,
                               const CertOptions& options) {
  const std::optional<Box> bbox = BoundingBox(region);
  if (!bbox) return {};
  Engine engine(relax, options);
  std::vector<decltype(engine.Start(region, *bbox, resume))> queue;
  queue.push_back(engine.Start(region, *bbox, resume));
  return Drive(std::move(queue), engine, options);
}

}  // namespace

QuadraticFunction QpValue(const Relaxation& relax, const AffineMap& x) {
  const Matrix& X = x.lin;
  const Vector& x0 = x.off;
  const Matrix HX = relax.H * X;
  const Matrix FX = relax.f_theta.transpose() * X;
  const Matrix quad = 0.5 * X.transpose() * HX + 0.5 * (FX + FX.transpose());
  const Vector lin = HX.transpose() * x0 + X.transpose() * relax.f +
                     relax.f_theta.transpose() * x0 + relax.shift.coeffs();
  const double off = 0.5 * x0.dot(relax.H * x0) + relax.f.dot(x0) +
                     relax.shift.offset();
  return {quad, lin, off};
}

AffineFunction LpValue(const Relaxation& relax, const AffineMap& x) {
  return {x.lin.transpose() * relax.c + relax.shift.coeffs(),
          relax.c.dot(x.off) + relax.shift.offset()};
}

std::vector<CertRegionOut> SolveCertLp(const Relaxation& relax,
                                       const Region& region,
                                       const EngineState* resume,
                                       const CertOptions& options) {
  if (resume && resume->kind != ProblemKind::kMilp) {
    throw std::invalid_argument("SolveCertLp: resume state is not a simplex state");
  }
  return Run<LpEngine>(relax, region, resume, options);
}

std::vector<CertRegionOut> SolveCertQp(const Relaxation& relax,
                                       const Region& region,
                                       const EngineState* resume,
                                       const CertOptions& options) {
  if (resume && resume->kind != ProblemKind::kMiqp) {
    throw std::invalid_argument("SolveCertQp: resume state is not an active-set state");
  }
  return Run<QpEngine>(relax, region, resume, options);
}

std::vector<CertRegionOut> SolveCert(const Relaxation& relax,
                                     const Region& region,
                                     const EngineState* resume,
                                     const CertOptions& options) {
  return relax.kind == ProblemKind::kMilp
             ? SolveCertLp(relax, region, resume, options)
             : SolveCertQp(relax, region, resume, options);
}

}  // namespace mpcert

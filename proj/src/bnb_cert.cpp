// SPDX-License-Identifier: Apache-2.0

#include "mpcert/bnb_cert.hpp"

#include <algorithm>
#include <stdexcept>

namespace mpcert {

std::string ToString(TupleState state) {
  switch (state) {
    case TupleState::kNone: return "None";
    case TupleState::kFin: return "Fin";
    case TupleState::kUnFin: return "UnFin";
    case TupleState::kCC: return "CC";
  }
  return "None";
}

TupleState ParseTupleState(const std::string& s) {
  if (s == "None") return TupleState::kNone;
  if (s == "Fin") return TupleState::kFin;
  if (s == "UnFin") return TupleState::kUnFin;
  if (s == "CC") return TupleState::kCC;
  throw std::invalid_argument("unknown tuple state '" + s + "'");
}

NodeTrail NodeTrail::Append(Node node) const {
  NodeTrail out;
  out.head_ = std::make_shared<const Link>(Link{std::move(node), head_});
  out.size_ = size_ + 1;
  return out;
}

std::vector<Node> NodeTrail::ToVector() const {
  std::vector<Node> out;
  out.reserve(size_);
  for (const Link* l = head_.get(); l != nullptr; l = l->prev.get()) {
    out.push_back(l->node);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

RegionTuple RegionTuple::Initial(const MpProblem& problem) {
  return Initial(problem, problem.theta0);
}

RegionTuple RegionTuple::Initial(const MpProblem& problem, const Box& box) {
  if (box.dim() != problem.theta_dim()) {
    throw std::invalid_argument("initial box has wrong dimension");
  }
  RegionTuple t;
  t.region = Region::FromBox(box);
  t.pending.push_back(Node{});
  return t;
}

void WorkList::Push(RegionTuple t) {
  items_.push_back(std::move(t));
  ++pushes_;
  peak_ = std::max(peak_, size());
}

RegionTuple WorkList::Pop() {
  if (items_.empty()) throw std::logic_error("WorkList::Pop on empty list");
  RegionTuple t = std::move(items_.back());
  items_.pop_back();
  return t;
}

std::vector<RegionTuple> WorkList::PopTop(int count) {
  count = std::min(count, size());
  std::vector<RegionTuple> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(Pop());
  return out;
}

CertSettings DefaultSettings(const MpProblem& problem) {
  CertSettings s;
  s.engine.compact_threshold = 4 * (problem.m() + problem.theta_dim());
  return s;
}

namespace {

void BranchInto(RegionTuple& reg, const Node& node, const MpProblem& problem) {
  const int i = SelectBranchIndex(node, problem);
  auto [one, zero] = Branch(node, i, problem);
  reg.pending.push_back(std::move(zero));
  reg.pending.push_back(std::move(one));
}

bool IsIntegral(const std::vector<AffineFunction>& optimizer,
                const std::vector<int>& free, const Tolerances& tol) {
  for (int i : free) {
    const AffineFunction& xi = optimizer[i];
    if (!xi.IsConstant(tol.constant)) return false;
    const double v = xi.offset();
    if (std::abs(v) > tol.integrality && std::abs(v - 1.0) > tol.integrality) {
      return false;
    }
  }
  return true;
}

}  // namespace

void CutCert(RegionTuple reg, const ValueFunction& lower,
             const std::vector<AffineFunction>& optimizer, const Node& node,
             WorkList& worklist, const MpProblem& problem,
             const Tolerances& tol) {
  reg.state = TupleState::kFin;
  reg.lower = ValueFunction::Plus();
  reg.lower_optimizer.clear();
  reg.current.reset();
  reg.engine_state.reset();

  if (lower.IsPlusInfinity()) {
    worklist.Push(std::move(reg));
    return;
  }
  const std::vector<int> free = FreeBinaries(problem, node);
  if (lower.IsMinusInfinity()) {
    // Never dominated; a leaf without a finite bound is simply dropped.
    if (!free.empty()) BranchInto(reg, node, problem);
    worklist.Push(std::move(reg));
    return;
  }
  if (static_cast<int>(optimizer.size()) != problem.n()) {
    throw std::invalid_argument("CutCert: finite bound without an optimizer at node " +
                                node.ToString());
  }

  // Dominance: cut where upper - lower - tol <= 0.
  if (reg.upper.IsFinite()) {
    const QuadraticFunction h =
        reg.upper.AsQuadratic() - lower.AsQuadratic() -
        QuadraticFunction(AffineFunction::Constant(problem.theta_dim(), tol.value));
    SignSplit s;
    if (h.IsAffine(tol.constant) && h.AffinePart().IsConstant(tol.constant)) {
      s = SplitBySign(reg.region, problem.theta0, h.AffinePart(), tol);
    } else {
      const std::optional<Box> bbox = BoundingBox(reg.region);
      if (!bbox) return;
      s = SplitBySign(reg.region, *bbox, h, tol);
    }
    if (s.nonpositive) {
      RegionTuple cut = reg;
      cut.region = std::move(*s.nonpositive);
      worklist.Push(std::move(cut));
    }
    if (!s.positive) return;
    reg.region = std::move(*s.positive);
  }

  // On the surviving side lower < upper, so the new incumbent is `lower`.
  if (IsIntegral(optimizer, free, tol)) {
    reg.upper = lower;
    reg.incumbent = optimizer;
    worklist.Push(std::move(reg));
    return;
  }
  BranchInto(reg, node, problem);
  worklist.Push(std::move(reg));
}

StepResult ProcessTuple(RegionTuple reg, WorkList& worklist,
                        std::vector<RegionTuple>& final_regions,
                        const MpProblem& problem, const CertSettings& settings,
                        bool delayed) {
  const Tolerances& tol = settings.engine.tol;
  CheckDeadline(settings.engine);
  if (delayed && reg.state == TupleState::kCC) {
    const ValueFunction lower = std::move(reg.lower);
    const std::vector<AffineFunction> optimizer = std::move(reg.lower_optimizer);
    const Node node = *reg.current;
    CutCert(std::move(reg), lower, optimizer, node, worklist, problem, tol);
    return StepResult::kCutEvaluated;
  }
  if (reg.state != TupleState::kUnFin && reg.pending.empty()) {
    reg.state = TupleState::kFin;
    final_regions.push_back(std::move(reg));
    return StepResult::kFinalized;
  }

  Node node;
  std::optional<EngineState> resume;
  if (reg.state == TupleState::kUnFin) {
    if (!delayed || !reg.current || !reg.engine_state) {
      throw std::logic_error("unfinished tuple without a resumable state");
    }
    node = *reg.current;
    resume = std::move(reg.engine_state);
    reg.engine_state.reset();
  } else {
    node = std::move(reg.pending.back());
    reg.pending.pop_back();
  }

  CertOptions options = settings.engine;
  if (!delayed) options.n_max.reset();
  const Relaxation relax = MakeRelaxation(problem, node);
  std::vector<CertRegionOut> outs;
  try {
    outs = SolveCert(relax, reg.region, resume ? &*resume : nullptr, options);
  } catch (const DeadlineExceeded&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (node " + node.ToString() +
                             ", region " + reg.region.Fingerprint() + ")");
  }
  for (CertRegionOut& out : outs) {
    RegionTuple t = reg;
    t.region = std::move(out.region);
    t.kappa_iter += out.iterations;
    if (!resume) {
      t.kappa_node += 1;
      t.trail = t.trail.Append(node);
    }
    if (!delayed) {
      CutCert(std::move(t), out.lower, out.optimizer, node, worklist, problem, tol);
      continue;
    }
    t.current = node;
    if (out.finished) {
      t.state = TupleState::kCC;
      t.lower = std::move(out.lower);
      t.lower_optimizer = std::move(out.optimizer);
    } else {
      t.state = TupleState::kUnFin;
      t.engine_state = std::move(out.state);
    }
    worklist.Push(std::move(t));
  }
  return StepResult::kCertified;
}

namespace {

CertPartition RunSerial(RegionTuple reg0, const MpProblem& problem,
                        const CertSettings& settings, bool delayed,
                        RunStats* stats) {
  CertPartition partition;
  RunStats local;
  WorkList worklist;
  worklist.Push(std::move(reg0));
  while (!worklist.empty()) {
    RegionTuple reg = worklist.Pop();
    ++local.pops;
    const std::int64_t before = worklist.pushes();
    ProcessTuple(std::move(reg), worklist, partition.regions, problem, settings,
                 delayed);
    ++local.outer_iterations;
    local.max_round_pushes = std::max(
        local.max_round_pushes, static_cast<int>(worklist.pushes() - before));
    local.trace.push_back(worklist.size());
  }
  local.peak = worklist.peak();
  local.pushes = worklist.pushes();
  if (stats) *stats = std::move(local);
  return partition;
}

}  // namespace

CertPartition BnbCertSerial(RegionTuple reg0, const MpProblem& problem,
                            const CertSettings& settings, RunStats* stats) {
  CertPartition p = RunSerial(std::move(reg0), problem, settings, false, stats);
  p.provenance.algorithm = "serial";
  return p;
}

CertPartition BnbCertSerialMod(RegionTuple reg0, const MpProblem& problem,
                               int n_max, const CertSettings& settings,
                               RunStats* stats) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  CertSettings s = settings;
  s.engine.n_max = n_max;
  CertPartition p = RunSerial(std::move(reg0), problem, s, true, stats);
  p.provenance.algorithm = "serial-mod";
  p.provenance.n_max = n_max;
  return p;
}

WorstCase ComputeWorstCase(const CertPartition& partition, const Tolerances& tol) {
  WorstCase wc;
  for (const RegionTuple& t : partition.regions) {
    Emptiness kind = Emptiness::kNonEmpty;
    if (t.region.has_quadratic()) kind = ComputeStatus(t.region, tol).kind;
    if (kind == Emptiness::kEmpty) continue;
    if (kind == Emptiness::kUndecided) {
      ++wc.undecided_regions;
      wc.undecided_kappa_iter = std::max(wc.undecided_kappa_iter, t.kappa_iter);
      wc.undecided_kappa_node = std::max(wc.undecided_kappa_node, t.kappa_node);
      continue;
    }
    wc.kappa_iter = std::max(wc.kappa_iter, t.kappa_iter);
    wc.kappa_node = std::max(wc.kappa_node, t.kappa_node);
  }
  return wc;
}

int LocateRegion(const CertPartition& partition, const Vector& theta, double tol) {
  for (std::size_t k = 0; k < partition.regions.size(); ++k) {
    if (partition.regions[k].region.Contains(theta, tol)) return static_cast<int>(k);
  }
  return -1;
}

std::vector<CanonicalEntry> Canonicalize(const CertPartition& partition) {
  std::vector<CanonicalEntry> out;
  out.reserve(partition.regions.size());
  for (const RegionTuple& t : partition.regions) {
    out.push_back({t.region.Fingerprint(), t.kappa_iter, t.kappa_node});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0
//
// Certification of the complete branch-and-bound method over a parameter
// set. A RegionTuple is the method's state for every theta in its region:
// pending nodes, accumulated counts, and the incumbent bound. Processing a
// tuple certifies its next node and evaluates the cut conditions, which may
// split the region further; tuples with no pending node are final.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpcert/geometry.hpp"
#include "mpcert/problem.hpp"
#include "mpcert/relax_cert.hpp"

namespace mpcert {

enum class TupleState { kNone, kFin, kUnFin, kCC };

std::string ToString(TupleState state);
TupleState ParseTupleState(const std::string& s);

/// Immutable, shareable list of explored nodes (newest first).
class NodeTrail {
 public:
  NodeTrail() = default;
  NodeTrail Append(Node node) const;
  std::vector<Node> ToVector() const;  // oldest first
  int size() const { return size_; }

 private:
  struct Link {
    Node node;
    std::shared_ptr<const Link> prev;
  };
  std::shared_ptr<const Link> head_;
  int size_ = 0;
};

struct RegionTuple {
  Region region;
  std::vector<Node> pending;  // back() is explored next
  int kappa_iter = 0;
  int kappa_node = 0;
  ValueFunction upper = ValueFunction::Plus();
  std::vector<AffineFunction> incumbent;  // optimizer attaining `upper`
  ValueFunction lower = ValueFunction::Plus();
  std::vector<AffineFunction> lower_optimizer;
  TupleState state = TupleState::kNone;
  std::optional<Node> current;
  std::optional<EngineState> engine_state;
  NodeTrail trail;

  /// (Theta0, [root], (0, 0), +inf, +inf, None, none).
  static RegionTuple Initial(const MpProblem& problem);
  static RegionTuple Initial(const MpProblem& problem, const Box& box);
};

/// LIFO stack of tuples with size statistics.
class WorkList {
 public:
  void Push(RegionTuple t);
  RegionTuple Pop();
  /// Removes the `count` most recently pushed tuples, newest first.
  std::vector<RegionTuple> PopTop(int count);
  bool empty() const { return items_.empty(); }
  int size() const { return static_cast<int>(items_.size()); }
  int peak() const { return peak_; }
  std::int64_t pushes() const { return pushes_; }

 private:
  std::vector<RegionTuple> items_;
  int peak_ = 0;
  std::int64_t pushes_ = 0;
};

struct Provenance {
  std::string algorithm = "serial";
  double r = 0.0;
  int n_p = 1;
  std::optional<int> n_max;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct CertPartition {
  std::vector<RegionTuple> regions;  // final tuples in finalization order
  Provenance provenance;
};

/// Counters of one master loop.
struct RunStats {
  int outer_iterations = 0;
  int peak = 0;                  // peak worklist size
  int max_round_pushes = 0;      // most tuples pushed by one outer iteration
  std::vector<int> trace;        // worklist size after each outer iteration
  std::int64_t pushes = 0;
  std::int64_t pops = 0;
  std::int64_t distributed = 0;
  std::int64_t tasks = 1;
};

struct CertSettings {
  CertOptions engine;
};

/// Default settings for a problem: redundancy removal above 4 (m + n_theta).
CertSettings DefaultSettings(const MpProblem& problem);

/// Cut conditions for `node` on `reg` whose relaxation has value `lower` and
/// optimizer `optimizer` there; pushes the resulting tuples.
void CutCert(RegionTuple reg, const ValueFunction& lower,
             const std::vector<AffineFunction>& optimizer, const Node& node,
             WorkList& worklist, const MpProblem& problem,
             const Tolerances& tol);

enum class StepResult { kFinalized, kCutEvaluated, kCertified };

/// One outer iteration on a popped tuple. `delayed` selects the
/// memory-bounded variant (cut conditions deferred through the CC state and
/// relaxations paused after settings.engine.n_max regions).
StepResult ProcessTuple(RegionTuple reg, WorkList& worklist,
                        std::vector<RegionTuple>& final_regions,
                        const MpProblem& problem, const CertSettings& settings,
                        bool delayed);

CertPartition BnbCertSerial(RegionTuple reg0, const MpProblem& problem,
                            const CertSettings& settings,
                            RunStats* stats = nullptr);

CertPartition BnbCertSerialMod(RegionTuple reg0, const MpProblem& problem,
                               int n_max, const CertSettings& settings,
                               RunStats* stats = nullptr);

/// Worst-case counts over final regions, Undecided regions excluded.
struct WorstCase {
  int kappa_iter = 0;
  int kappa_node = 0;
  int undecided_regions = 0;
  int undecided_kappa_iter = 0;
  int undecided_kappa_node = 0;
};
WorstCase ComputeWorstCase(const CertPartition& partition,
                           const Tolerances& tol = {});

/// First region (in stored order) containing theta, or -1.
int LocateRegion(const CertPartition& partition, const Vector& theta,
                 double tol = 1e-9);

/// Regions as (fingerprint, kappa_iter, kappa_node), sorted.
struct CanonicalEntry {
  std::string fingerprint;
  int kappa_iter;
  int kappa_node;
  friend bool operator==(const CanonicalEntry&, const CanonicalEntry&) = default;
  friend auto operator<=>(const CanonicalEntry&, const CanonicalEntry&) = default;
};
std::vector<CanonicalEntry> Canonicalize(const CertPartition& partition);

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0
//
// Parametric certification of a single relaxation over a region of theta.
//
// Both engines replay the pointwise solvers in online.hpp symbolically: every
// quantity that depends on theta is carried as an affine function, and every
// decision the pointwise solver takes by comparing numbers becomes a split of
// the region along the same comparison. Each output region therefore has one
// iteration count, one affine optimizer and one closed-form optimal value.
//
// With CertOptions::n_max set, an engine stops once the regions it has
// finished plus those still queued reach n_max (after at least one step) and
// hands back the queued ones as unfinished outputs with a resumable state.

#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mpcert/dual_active_set.hpp"
#include "mpcert/geometry.hpp"
#include "mpcert/problem.hpp"
#include "mpcert/simplex.hpp"

namespace mpcert {

/// Resumable position of an engine inside one region.
struct EngineState {
  ProblemKind kind = ProblemKind::kMilp;
  int iterations = 0;  // iterations spent on this node so far

  // Simplex: rows [0, cursor) have their initial basis column decided; once
  // every row is decided cursor is -1, `basis` is the full initial basis and
  // `pivots` lists the (row, column) pivots taken from it. Resuming replays
  // them so the arithmetic matches an uninterrupted run exactly.
  int cursor = 0;
  std::vector<int> basis;
  std::vector<std::pair<int, int>> pivots;

  // Dual active set: working set with multipliers, primal iterate, and the
  // constraint being added (-1 when none).
  std::vector<int> working_set;
  AffineMap x;
  AffineMap u;
  int adding = -1;
  AffineFunction u_adding;
};

struct CertOptions {
  Tolerances tol;
  SimplexOptions simplex;
  DualActiveSetOptions dual;
  std::optional<int> n_max;
  int compact_threshold = 0;  // drop redundant rows above this count; 0 = never
  /// Wall-clock limit; engines and the B&B loops throw DeadlineExceeded past it.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

class DeadlineExceeded : public std::runtime_error {
 public:
  DeadlineExceeded() : std::runtime_error("certification deadline exceeded") {}
};

/// Throws DeadlineExceeded when options.deadline has passed.
void CheckDeadline(const CertOptions& options);

struct CertRegionOut {
  Region region;
  ValueFunction lower;
  std::vector<AffineFunction> optimizer;  // all n variables; empty unless finite
  int iterations = 0;                     // iterations spent in this call
  bool finished = true;
  std::optional<EngineState> state;       // present iff !finished
};

std::vector<CertRegionOut> SolveCertLp(const Relaxation& relax,
                                       const Region& region,
                                       const EngineState* resume,
                                       const CertOptions& options);

std::vector<CertRegionOut> SolveCertQp(const Relaxation& relax,
                                       const Region& region,
                                       const EngineState* resume,
                                       const CertOptions& options);

/// Dispatches on the relaxation kind.
std::vector<CertRegionOut> SolveCert(const Relaxation& relax,
                                     const Region& region,
                                     const EngineState* resume,
                                     const CertOptions& options);

/// Optimal value of a QP relaxation along an affine primal path x(theta).
QuadraticFunction QpValue(const Relaxation& relax, const AffineMap& x);

/// Optimal value of an LP relaxation along an affine primal path x(theta).
AffineFunction LpValue(const Relaxation& relax, const AffineMap& x);

}  // namespace mpcert

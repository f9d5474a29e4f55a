// SPDX-License-Identifier: Apache-2.0
//
// Pointwise validation of a certified partition against the online solver.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/problem.hpp"

namespace mpcert {

enum class SampleMode { kAuto, kGrid, kSobol };

/// `count` points of the box. kGrid places them on an evenly spaced grid
/// (endpoints included, per-axis resolution floor(count^(1/d)) for d > 1);
/// kSobol takes the Sobol sequence shifted by half a cell so no point sits
/// on the box boundary. kAuto is kGrid for one parameter, else kSobol.
std::vector<Vector> SamplePoints(const Box& box, int count, SampleMode mode = SampleMode::kAuto);

struct VerifyOptions {
  int samples = 1000;
  SampleMode mode = SampleMode::kAuto;
  double boundary_margin = 1e-7;  // samples closer to a region boundary are skipped
  double membership_tol = 1e-9;
  bool compare_sequences = true;
  /// Relative tolerance for the incumbent value J-bar; unset skips the check.
  std::optional<double> value_rtol;
};

struct VerifyReport {
  int samples = 0;
  int checked = 0;
  int boundary_skipped = 0;
  int covering_violations = 0;
  int kappa_mismatches = 0;     // (kappa_iter, kappa_node) differ from the oracle
  int sequence_mismatches = 0;  // node sequences differ
  int value_mismatches = 0;     // J-bar differs beyond value_rtol
  int overlap_conflicts = 0;    // interior point in regions with different counts
  int sampled_max_iter = 0;
  int sampled_max_node = 0;
  WorstCase certified;

  int mismatches() const {
    return kappa_mismatches + sequence_mismatches + value_mismatches + overlap_conflicts;
  }
  bool ok() const { return mismatches() == 0 && covering_violations == 0; }
};

VerifyReport Verify(const MpProblem& problem, const CertPartition& partition,
                    const VerifyOptions& options = {}, const CertOptions* engine = nullptr);

/// Sampled points that lie in no region of the partition.
int CountCoveringViolations(const CertPartition& partition, const std::vector<Vector>& points,
                            double tol = 1e-9);

}  // namespace mpcert

// SPDX-License-Identifier: Apache-2.0

#include "mpcert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/sobol.hpp>

#include "mpcert/online.hpp"

namespace mpcert {

std::vector<Vector> SamplePoints(const Box& box, int count, SampleMode mode) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  const int d = box.dim();
  if (d == 0) return {Vector()};
  if (mode == SampleMode::kAuto) mode = d == 1 ? SampleMode::kGrid : SampleMode::kSobol;
  std::vector<Vector> out;
  out.reserve(count);
  if (mode == SampleMode::kGrid) {
    const int per_axis =
        d == 1 ? count : std::max(2, static_cast<int>(std::floor(std::pow(count, 1.0 / d) + 1e-9)));
    std::vector<int> idx(d, 0);
    for (;;) {
      Vector theta(d);
      for (int i = 0; i < d; ++i) {
        const double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[i]) / (per_axis - 1);
        theta(i) = box.lower(i) + t * (box.upper(i) - box.lower(i));
      }
      out.push_back(std::move(theta));
      int i = 0;
      while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
      if (i == d) break;
    }
    return out;
  }
  boost::random::sobol engine(d);
  for (int k = 0; k < count; ++k) {
    Vector theta(d);
    for (int i = 0; i < d; ++i) {
      // The engine yields 64-bit integers; map to the cell midpoint in (0, 1).
      const double u = (static_cast<double>(engine()) + 0.5) * 0x1p-64;
      theta(i) = box.lower(i) + u * (box.upper(i) - box.lower(i));
    }
    out.push_back(std::move(theta));
  }
  return out;
}

VerifyReport Verify(const MpProblem& problem, const CertPartition& partition,
                    const VerifyOptions& options, const CertOptions* engine) {
  const CertOptions engine_options = engine ? *engine : CertOptions{};
  VerifyReport report;
  report.certified = ComputeWorstCase(partition, engine_options.tol);
  const std::vector<Vector> points = SamplePoints(problem.theta0, options.samples, options.mode);
  report.samples = static_cast<int>(points.size());
  std::vector<int> containing;
  for (const Vector& theta : points) {
    containing.clear();
    int best = -1;
    double best_margin = -1.0;
    for (std::size_t k = 0; k < partition.regions.size(); ++k) {
      const Region& region = partition.regions[k].region;
      if (!region.Contains(theta, options.membership_tol)) continue;
      containing.push_back(static_cast<int>(k));
      const double margin = region.Margin(theta);
      if (best < 0 || margin > best_margin) {
        best = static_cast<int>(k);
        best_margin = margin;
      }
    }
    if (best < 0) {
      ++report.covering_violations;
      continue;
    }
    if (best_margin <= options.boundary_margin) {
      ++report.boundary_skipped;
      continue;
    }
    ++report.checked;
    const RegionTuple& t = partition.regions[best];
    for (int k : containing) {
      const RegionTuple& o = partition.regions[k];
      if (k != best && partition.regions[k].region.Margin(theta) > options.boundary_margin &&
          (o.kappa_iter != t.kappa_iter || o.kappa_node != t.kappa_node)) {
        ++report.overlap_conflicts;
        break;
      }
    }
    const OnlineResult online = BnbSolve(problem, theta, engine_options);
    report.sampled_max_iter = std::max(report.sampled_max_iter, online.kappa_iter);
    report.sampled_max_node = std::max(report.sampled_max_node, online.kappa_node);
    if (online.kappa_iter != t.kappa_iter || online.kappa_node != t.kappa_node) {
      ++report.kappa_mismatches;
    }
    if (options.compare_sequences && online.node_sequence != t.trail.ToVector()) {
      ++report.sequence_mismatches;
    }
    if (options.value_rtol) {
      const double cert = t.upper.Evaluate(theta);
      const double ref = online.objective;
      const bool both_inf = std::isinf(cert) && std::isinf(ref) && (cert > 0) == (ref > 0);
      if (!both_inf &&
          !(std::abs(cert - ref) <= *options.value_rtol * std::max(1.0, std::abs(ref)))) {
        ++report.value_mismatches;
      }
    }
  }
  return report;
}

int CountCoveringViolations(const CertPartition& partition, const std::vector<Vector>& points,
                            double tol) {
  int violations = 0;
  for (const Vector& theta : points) {
    if (LocateRegion(partition, theta, tol) < 0) ++violations;
  }
  return violations;
}

}  // namespace mpcert

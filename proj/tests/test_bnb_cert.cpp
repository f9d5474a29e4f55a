// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/instances.hpp"
#include "mpcert/online.hpp"
#include "mpcert/parallel.hpp"
#include "mpcert/verify.hpp"
#include "test_util.hpp"

namespace mpcert {
namespace {

using testing::Grid;
using testing::V;

CertPartition Serial(const MpProblem& p, RunStats* stats = nullptr) {
  return BnbCertSerial(RegionTuple::Initial(p), p, DefaultSettings(p), stats);
}

void ExpectOracleAgreement(const MpProblem& p, const CertPartition& part, int samples = 200) {
  VerifyOptions o;
  o.samples = samples;
  o.value_rtol = 1e-6;
  const VerifyReport r = Verify(p, part, o);
  EXPECT_EQ(r.covering_violations, 0);
  EXPECT_EQ(r.kappa_mismatches, 0);
  EXPECT_EQ(r.sequence_mismatches, 0);
  EXPECT_EQ(r.value_mismatches, 0);
  EXPECT_EQ(r.overlap_conflicts, 0);
  EXPECT_GT(r.checked, samples / 2);
}

TEST(WorkList, LifoAndPeak) {
  const MpProblem p = PTiny();
  WorkList s;
  for (int k = 0; k < 3; ++k) {
    RegionTuple t = RegionTuple::Initial(p);
    t.kappa_node = k;
    s.Push(t);
  }
  EXPECT_EQ(s.peak(), 3);
  EXPECT_EQ(s.Pop().kappa_node, 2);
  const auto top = s.PopTop(5);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].kappa_node, 1);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.pushes(), 3);
  EXPECT_THROW(s.Pop(), std::exception);
}

TEST(TupleState, NamesRoundTrip) {
  for (TupleState t : {TupleState::kNone, TupleState::kFin, TupleState::kUnFin, TupleState::kCC}) {
    EXPECT_EQ(ParseTupleState(ToString(t)), t);
  }
}

TEST(CutCert, InfeasibleRegionDropsNode) {
  const MpProblem p = PTiny();
  RegionTuple t = RegionTuple::Initial(p);
  t.pending.clear();
  WorkList s;
  CutCert(t, ValueFunction::Plus(), {}, Node{}, s, p, {});
  ASSERT_EQ(s.size(), 1);
  const RegionTuple out = s.Pop();
  EXPECT_TRUE(out.pending.empty());
  EXPECT_TRUE(out.upper.IsPlusInfinity());
}

TEST(CutCert, TinyRootIntegerFeasibleSide) {
  const MpProblem p = PTiny();
  RegionTuple t = RegionTuple::Initial(p, {V({0.0}), V({0.5})});
  t.pending.clear();
  WorkList s;
  const std::vector<AffineFunction> x{{V({1.0}), 0.0}, AffineFunction::Constant(1, 1.0)};
  CutCert(t, ValueFunction(AffineFunction(V({-1.0}), -2.0)), x, Node{}, s, p, {});
  ASSERT_EQ(s.size(), 1);
  const RegionTuple out = s.Pop();
  EXPECT_TRUE(out.pending.empty());
  EXPECT_NEAR(out.upper.Evaluate(V({0.3})), -2.3, 1e-12);
}

TEST(CutCert, TinyRootFractionalSideBranches) {
  const MpProblem p = PTiny();
  RegionTuple t = RegionTuple::Initial(p, {V({-0.5}), V({0.0})});
  t.pending.clear();
  WorkList s;
  const std::vector<AffineFunction> x{AffineFunction::Constant(1, 0.0), {V({1.0}), 1.0}};
  CutCert(t, ValueFunction(AffineFunction(V({-2.0}), -2.0)), x, Node{}, s, p, {});
  ASSERT_EQ(s.size(), 1);
  const RegionTuple out = s.Pop();
  ASSERT_EQ(out.pending.size(), 2u);
  EXPECT_EQ(out.pending.back(), (Node{{}, {1}}));
  EXPECT_EQ(out.pending.front(), (Node{{1}, {}}));
}

TEST(BnbCertSerial, TinyNodeCounts) {
  const MpProblem p = PTiny();
  const CertPartition part = Serial(p);
  for (const RegionTuple& t : part.regions) {
    const auto box = BoundingBox(t.region);
    ASSERT_TRUE(box);
    const double mid = 0.5 * (box->lower(0) + box->upper(0));
    EXPECT_EQ(t.kappa_node, mid >= 0.0 ? 1 : 3);
  }
  for (double th : Grid(-0.5, 0.5, 101)) {
    const int k = LocateRegion(part, V({th}));
    ASSERT_GE(k, 0);
    if (std::abs(th) > 1e-9) EXPECT_EQ(part.regions[k].kappa_node, th > 0 ? 1 : 3);
  }
  EXPECT_EQ(ComputeWorstCase(part).kappa_node, 3);
  ExpectOracleAgreement(p, part, 101);
}

TEST(BnbCertSerial, NoBinariesMatchesRootCertification) {
  MpProblem p = GenRandom({ProblemKind::kMilp, 2, 3});
  p.n_c = p.n();
  p.n_b = 0;
  p.binary_set.clear();
  const CertPartition part = Serial(p);
  const auto root = SolveCert(MakeRelaxation(p, Node{}), Region::FromBox(p.theta0), nullptr,
                              DefaultSettings(p).engine);
  EXPECT_EQ(part.regions.size(), root.size());
  for (const RegionTuple& t : part.regions) EXPECT_EQ(t.kappa_node, 1);
}

class SerialAgainstOracle : public ::testing::TestWithParam<std::tuple<ProblemKind, int, int>> {};

TEST_P(SerialAgainstOracle, PointwiseExact) {
  const auto [kind, nb, seed] = GetParam();
  const MpProblem p = GenRandom({kind, nb, static_cast<std::uint64_t>(seed)});
  const CertPartition part = Serial(p);
  ExpectOracleAgreement(p, part, 300);
  const WorstCase wc = ComputeWorstCase(part);
  VerifyOptions o;
  o.samples = 300;
  const VerifyReport r = Verify(p, part, o);
  EXPECT_GE(wc.kappa_iter, r.sampled_max_iter);
  EXPECT_GE(wc.kappa_node, r.sampled_max_node);
}

INSTANTIATE_TEST_SUITE_P(Small, SerialAgainstOracle,
                         ::testing::Values(std::make_tuple(ProblemKind::kMilp, 2, 1),
                                           std::make_tuple(ProblemKind::kMilp, 3, 4),
                                           std::make_tuple(ProblemKind::kMiqp, 2, 1),
                                           std::make_tuple(ProblemKind::kMiqp, 3, 2),
                                           std::make_tuple(ProblemKind::kMiqp, 4, 3)));

TEST(BnbCertSerial, CoversBox) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 4, 1});
  const CertPartition part = Serial(p);
  EXPECT_EQ(CountCoveringViolations(part, SamplePoints(p.theta0, 10000, SampleMode::kSobol)), 0);
}

TEST(BnbCertSerialMod, SameCountsAsSerial) {
  for (const MpProblem& p : {PTiny(), GenRandom({ProblemKind::kMilp, 3, 4}),
                             GenRandom({ProblemKind::kMiqp, 3, 2})}) {
    RunStats base;
    const auto serial = Canonicalize(Serial(p, &base));
    for (int n_max : {1, 3, 1000000}) {
      RunStats st;
      const CertPartition mod =
          BnbCertSerialMod(RegionTuple::Initial(p), p, n_max, DefaultSettings(p), &st);
      EXPECT_EQ(Canonicalize(mod), serial) << "n_max " << n_max;
      EXPECT_GE(st.outer_iterations, base.outer_iterations);
    }
  }
}

TEST(BnbCertSerialMod, PeakBoundedByUnmodified) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 5, 1});
  RunStats base, mod;
  Serial(p, &base);
  BnbCertSerialMod(RegionTuple::Initial(p), p, 10, DefaultSettings(p), &mod);
  EXPECT_LE(mod.peak, base.peak);
}

TEST(Canonical, OrderIndependent) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 4});
  CertPartition a = Serial(p);
  CertPartition b = a;
  std::reverse(b.regions.begin(), b.regions.end());
  EXPECT_EQ(Canonicalize(a), Canonicalize(b));
}

TEST(StaticPartCount, Formula) {
  EXPECT_EQ(StaticPartCount(2, 8), 2);
  EXPECT_EQ(StaticPartCount(1, 4), 1);
  EXPECT_EQ(StaticPartCount(3, 20), 81);
}

TEST(RatioSchedule, Levels) {
  const RatioSchedule s(0.4, {{2, 1.0}});
  EXPECT_DOUBLE_EQ(s.At(0), 0.4);
  EXPECT_DOUBLE_EQ(s.At(2), 1.0);
  EXPECT_THROW(RatioSchedule(1.5), std::invalid_argument);
}

TEST(WorkerPool, RunsTasksAndPropagatesErrors) {
  WorkerPool pool(3);
  std::atomic<int> n{0};
  for (int k = 0; k < 50; ++k) pool.Submit([&n] { ++n; });
  pool.Wait();
  EXPECT_EQ(n.load(), 50);
  pool.Submit([] { throw std::runtime_error("boom"); });
  EXPECT_THROW(pool.Wait(), std::runtime_error);
  pool.Submit([&n] { ++n; });
  pool.Wait();
  EXPECT_EQ(n.load(), 51);
}

TEST(BnbCertDyn, ZeroRatioReproducesSerialOrder) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 4});
  const CertPartition serial = Serial(p);
  WorkerPool pool(2);
  const CertPartition dyn = BnbCertDyn(p, RatioSchedule(0.0), pool, DefaultSettings(p));
  ASSERT_EQ(dyn.regions.size(), serial.regions.size());
  for (std::size_t k = 0; k < dyn.regions.size(); ++k) {
    EXPECT_EQ(dyn.regions[k].region.Fingerprint(), serial.regions[k].region.Fingerprint());
    EXPECT_EQ(dyn.regions[k].kappa_iter, serial.regions[k].kappa_iter);
  }
}

class ParallelEquivalence : public ::testing::TestWithParam<int> {};

TEST_P(ParallelEquivalence, DynamicMatchesSerial) {
  const int workers = GetParam();
  for (const MpProblem& p : {PTiny(), GenRandom({ProblemKind::kMilp, 3, 4}),
                             GenRandom({ProblemKind::kMiqp, 4, 3})}) {
    const auto serial = Canonicalize(Serial(p));
    WorkerPool pool(workers);
    for (double r : {0.4, 0.8, 1.0}) {
      RunMetrics m;
      const CertPartition dyn = BnbCertDyn(p, RatioSchedule(r), pool, DefaultSettings(p), &m);
      EXPECT_EQ(Canonicalize(dyn), serial) << "r " << r;
      EXPECT_TRUE(m.Conserved());
      EXPECT_EQ(m.regions, static_cast<std::int64_t>(dyn.regions.size()));
    }
    RunMetrics m;
    const CertPartition mod = BnbCertDynMod(p, RatioSchedule(0.8), pool, 5, DefaultSettings(p), &m);
    EXPECT_EQ(Canonicalize(mod), serial);
    EXPECT_TRUE(m.Conserved());
  }
}

INSTANTIATE_TEST_SUITE_P(Workers, ParallelEquivalence, ::testing::Values(1, 2, 4, 8));

TEST(BnbCertStatic, SinglePartEqualsSerial) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 3, 2});
  WorkerPool pool(2);
  EXPECT_EQ(Canonicalize(BnbCertStatic(p, 1, pool, std::nullopt, DefaultSettings(p))),
            Canonicalize(Serial(p)));
}

TEST(BnbCertStatic, TinyTwoPartsPointwiseExact) {
  const MpProblem p = PTiny();
  WorkerPool pool(2);
  const CertPartition part = BnbCertStatic(p, 2, pool, std::nullopt, DefaultSettings(p));
  ExpectOracleAgreement(p, part, 101);
}

TEST(BnbCertStatic, RefinesSerialPartition) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 4, 1});
  WorkerPool pool(4);
  RunMetrics m;
  const CertPartition part = BnbCertStatic(p, 4, pool, std::nullopt, DefaultSettings(p), &m);
  EXPECT_GE(part.regions.size(), Serial(p).regions.size());
  ExpectOracleAgreement(p, part, 300);
  EXPECT_EQ(ComputeWorstCase(part).kappa_node, ComputeWorstCase(Serial(p)).kappa_node);
  const CertPartition mod = BnbCertStatic(p, 4, pool, 3, DefaultSettings(p));
  EXPECT_EQ(Canonicalize(mod), Canonicalize(part));
}

TEST(BnbCertDynMod, PeakNearBudget) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 5, 1});
  WorkerPool pool(2);
  RunMetrics unmod, mod;
  BnbCertDyn(p, RatioSchedule(0.8), pool, DefaultSettings(p), &unmod);
  BnbCertDynMod(p, RatioSchedule(0.8), pool, 20, DefaultSettings(p), &mod);
  EXPECT_LE(mod.peak, 20 + mod.max_round_pushes);
  EXPECT_LT(mod.peak, unmod.peak);
}

TEST(BnbCertDynMod, PausingAddsOuterIterations) {
  // With r = 0 the master does all the work, so its loop counts every step.
  const MpProblem p = GenRandom({ProblemKind::kMilp, 5, 1});
  WorkerPool pool(1);
  RunMetrics unmod, mod;
  BnbCertDyn(p, RatioSchedule(0.0), pool, DefaultSettings(p), &unmod);
  BnbCertDynMod(p, RatioSchedule(0.0), pool, 20, DefaultSettings(p), &mod);
  EXPECT_GE(mod.outer_iterations, unmod.outer_iterations);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.algorithm = Algorithm::kDynMod;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c.n_max = 10;
  EXPECT_NO_THROW(c.Validate());
  c.r = -0.1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  for (Algorithm a : {Algorithm::kSerial, Algorithm::kSerialMod, Algorithm::kStatic, Algorithm::kDyn,
                      Algorithm::kDynMod}) {
    EXPECT_EQ(ParseAlgorithm(ToString(a)), a);
  }
}

TEST(RunCertification, FillsMetrics) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 4});
  RunConfig c;
  c.algorithm = Algorithm::kDyn;
  c.r = 1.0;
  c.workers = 2;
  RunMetrics m;
  const CertPartition part = RunCertification(p, c, DefaultSettings(p), &m);
  EXPECT_EQ(m.algorithm, "dyn");
  EXPECT_EQ(m.workers, 2);
  EXPECT_EQ(m.regions, static_cast<std::int64_t>(part.regions.size()));
  EXPECT_FALSE(m.trace.empty());
  EXPECT_GT(m.wall_s, 0.0);
}

TEST(SpeedupBench, ProducesRows) {
  const std::vector<MpProblem> ps{GenRandom({ProblemKind::kMiqp, 3, 2})};
  const auto rows = SpeedupBench(ps, {Algorithm::kDyn, Algorithm::kStatic}, {1, 2}, RatioSchedule(1.0), 1);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].algorithm, "dyn");
  EXPECT_EQ(rows[3].algorithm, "static");
  EXPECT_EQ(rows[3].workers, 2);
  for (const SpeedupRow& r : rows) EXPECT_GT(r.speedup, 0.0);
  EXPECT_DOUBLE_EQ(Median({3.0, 1.0, 2.0}), 2.0);
}

}  // namespace
}  // namespace mpcert

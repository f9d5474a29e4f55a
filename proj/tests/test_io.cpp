// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "mpcert/instances.hpp"
#include "mpcert/io.hpp"
#include "mpcert/plot.hpp"
#include "mpcert/verify.hpp"
#include "test_util.hpp"

namespace mpcert {
namespace {

namespace fs = std::filesystem;
using testing::V;

fs::path TempDir() {
  const fs::path d = fs::temp_directory_path() /
                     ("mpcert_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                      "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(d);
  return d;
}

TEST(Doubles, EncodeDecode) {
  const double inf = std::numeric_limits<double>::infinity();
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, inf, -inf}) {
    EXPECT_EQ(DecodeDouble(Json(EncodeDouble(v))), v);
  }
  EXPECT_TRUE(std::isnan(DecodeDouble(Json("nan"))));
  EXPECT_EQ(DecodeDouble(Json(2.5)), 2.5);
  EXPECT_THROW(DecodeDouble(Json("abc")), InputError);
  EXPECT_THROW(DecodeDouble(Json::array()), InputError);
}

TEST(ProblemJson, RoundTripBitExact) {
  for (const MpProblem& p : {PTiny(), GenRandom({ProblemKind::kMiqp, 4, 9}),
                             GenRandom({ProblemKind::kMilp, 5, 3})}) {
    const MpProblem q = ProblemFromJson(ProblemToJson(p));
    EXPECT_EQ(q.kind, p.kind);
    EXPECT_EQ(q.binary_set, p.binary_set);
    EXPECT_EQ(q.A, p.A);
    EXPECT_EQ(q.b, p.b);
    EXPECT_EQ(q.W, p.W);
    EXPECT_EQ(q.c, p.c);
    EXPECT_EQ(q.H, p.H);
    EXPECT_EQ(q.f_theta, p.f_theta);
    EXPECT_EQ(q.theta0.lower, p.theta0.lower);
  }
}

TEST(ProblemJson, RejectsMalformed) {
  Json j = ProblemToJson(PTiny());
  j["A"] = Json::array({Json::array({"1"})});
  EXPECT_THROW(ProblemFromJson(j), InputError);
  j = ProblemToJson(PTiny());
  j.erase("b");
  EXPECT_THROW(ProblemFromJson(j), InputError);
  j = ProblemToJson(PTiny());
  j["kind"] = "lp";
  EXPECT_THROW(ProblemFromJson(j), InputError);
}

TEST(ProblemJson, FileRoundTrip) {
  const fs::path d = TempDir();
  const MpProblem p = PendulumMiqp({2, ""});
  SaveProblem((d / "p.json").string(), p);
  const MpProblem q = LoadProblem((d / "p.json").string());
  EXPECT_EQ(q.H, p.H);
  EXPECT_EQ(q.W, p.W);
  EXPECT_THROW(LoadProblem((d / "missing.json").string()), InputError);
  std::ofstream((d / "bad.json").string()) << "{ not json";
  EXPECT_THROW(LoadProblem((d / "bad.json").string()), InputError);
  fs::remove_all(d);
}

TEST(ValueFunctionJson, AllVariants) {
  Matrix Q(2, 2);
  Q << 1, 0.5, 0.5, 2;
  for (const ValueFunction& v :
       {ValueFunction::Plus(), ValueFunction::Minus(), ValueFunction(AffineFunction(V({1.0, -2.0}), 0.3)),
        ValueFunction(QuadraticFunction(Q, V({0.1, 0.2}), -1.0))}) {
    const ValueFunction w = ValueFunctionFromJson(ValueFunctionToJson(v), 2);
    EXPECT_EQ(w.IsPlusInfinity(), v.IsPlusInfinity());
    EXPECT_EQ(w.IsMinusInfinity(), v.IsMinusInfinity());
    EXPECT_EQ(w.IsQuadratic(), v.IsQuadratic());
    const Vector t = V({0.3, -0.2});
    EXPECT_EQ(w.Evaluate(t), v.Evaluate(t));
  }
}

TEST(PartitionJson, RoundTripPreservesCanonicalForm) {
  const fs::path d = TempDir();
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 3, 2});
  const CertPartition part = BnbCertSerial(RegionTuple::Initial(p), p, DefaultSettings(p));
  SavePartition((d / "part.json").string(), part, p);
  const CertPartition back = LoadPartition((d / "part.json").string(), p.theta_dim());
  EXPECT_EQ(Canonicalize(back), Canonicalize(part));
  ASSERT_EQ(back.regions.size(), part.regions.size());
  for (std::size_t k = 0; k < part.regions.size(); ++k) {
    EXPECT_EQ(back.regions[k].region.Fingerprint(), part.regions[k].region.Fingerprint());
  }
  const Json j = ReadJsonFile((d / "part.json").string());
  EXPECT_EQ(j.at("format"), "mpcert-partition-v1");
  EXPECT_EQ(j.at("worst_case").at("kappa_node").get<int>(), ComputeWorstCase(part).kappa_node);
  EXPECT_TRUE(Verify(p, back).ok());
  fs::remove_all(d);
}

TEST(TupleJson, PausedStateResumesIdentically) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 3, 4});
  const Relaxation relax = MakeRelaxation(p, Node{});
  CertOptions opt;
  opt.n_max = 1;
  const auto outs = SolveCert(relax, Region::FromBox(p.theta0), nullptr, opt);
  const CertRegionOut* paused = nullptr;
  for (const auto& o : outs) {
    if (!o.finished) paused = &o;
  }
  ASSERT_NE(paused, nullptr);
  RegionTuple t = RegionTuple::Initial(p);
  t.region = paused->region;
  t.state = TupleState::kUnFin;
  t.current = Node{};
  t.engine_state = paused->state;
  const RegionTuple back = TupleFromJson(TupleToJson(t), p.theta_dim());
  ASSERT_TRUE(back.engine_state.has_value());
  EXPECT_EQ(back.state, TupleState::kUnFin);
  EXPECT_EQ(back.region.Fingerprint(), t.region.Fingerprint());
  const auto a = SolveCert(relax, t.region, &*t.engine_state, {});
  const auto b = SolveCert(relax, back.region, &*back.engine_state, {});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].region.Fingerprint(), b[k].region.Fingerprint());
    EXPECT_EQ(a[k].iterations, b[k].iterations);
  }
}

TEST(MetricsCsv, AppendAndRead) {
  const fs::path d = TempDir();
  const std::string path = (d / "m.csv").string();
  RunMetrics m;
  m.algorithm = "dyn-mod";
  m.r = 0.8;
  m.workers = 4;
  m.n_max = 100;
  m.wall_s = 1.25;
  m.peak = 17;
  m.outer_iterations = 40;
  m.regions = 321;
  WorstCase w;
  w.kappa_iter = 12;
  w.kappa_node = 5;
  AppendMetricsCsv(path, m, w, 7);
  m.n_max.reset();
  AppendMetricsCsv(path, m, w, 8);
  const auto rows = ReadMetricsCsv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].algorithm, "dyn-mod");
  EXPECT_EQ(rows[0].n_max, "100");
  EXPECT_EQ(rows[1].n_max, "");
  EXPECT_EQ(rows[0].regions, 321);
  EXPECT_EQ(rows[1].seed, 8u);
  EXPECT_EQ(rows[0].worst_kappa_node, 5);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, MetricsCsvHeader());
  fs::remove_all(d);
}

TEST(SamplePoints, GridAndSobol) {
  const Box b{V({-1.0, 0.0}), V({1.0, 2.0})};
  const auto g = SamplePoints(b, 25, SampleMode::kGrid);
  EXPECT_EQ(g.size(), 25u);
  const auto s = SamplePoints(b, 1000, SampleMode::kSobol);
  ASSERT_EQ(s.size(), 1000u);
  for (const Vector& t : s) {
    EXPECT_GT(t(0), -1.0);
    EXPECT_LT(t(0), 1.0);
    EXPECT_GT(t(1), 0.0);
    EXPECT_LT(t(1), 2.0);
  }
  EXPECT_EQ(SamplePoints(b, 1000, SampleMode::kSobol)[17], s[17]);
  const auto one = SamplePoints({V({-0.5}), V({0.5})}, 101);
  EXPECT_DOUBLE_EQ(one.front()(0), -0.5);
  EXPECT_DOUBLE_EQ(one.back()(0), 0.5);
}

TEST(Verify, DetectsCorruption) {
  const MpProblem p = GenRandom({ProblemKind::kMiqp, 3, 2});
  CertPartition part = BnbCertSerial(RegionTuple::Initial(p), p, DefaultSettings(p));
  VerifyOptions o;
  o.samples = 500;
  ASSERT_TRUE(Verify(p, part, o).ok());
  // Wrong counts in the largest region.
  std::size_t k = 0;
  double best = -1;
  for (std::size_t i = 0; i < part.regions.size(); ++i) {
    const auto ball = ChebyshevBall(part.regions[i].region);
    if (ball && ball->radius > best) {
      best = ball->radius;
      k = i;
    }
  }
  CertPartition bad = part;
  bad.regions[k].kappa_iter += 1;
  EXPECT_GT(Verify(p, bad, o).kappa_mismatches, 0);
  // A missing region leaves a hole.
  bad = part;
  bad.regions.erase(bad.regions.begin() + static_cast<long>(k));
  EXPECT_GT(Verify(p, bad, o).covering_violations, 0);
}

TEST(Plot, SlicePolygonOfBoxAndHalfPlane) {
  const Box b{V({-1.0, -1.0}), V({1.0, 1.0})};
  const Region r = Region::FromBox(b).WithAffine(AffineFunction(V({1.0, 1.0}), 0.0));
  const auto poly = SlicePolygon(r, b, 0, 1, V({0.0, 0.0}));
  ASSERT_EQ(poly.size(), 3u);
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& u = poly[i];
    const auto& v = poly[(i + 1) % poly.size()];
    area += u.first * v.second - v.first * u.second;
  }
  EXPECT_NEAR(std::abs(area) / 2, 2.0, 1e-9);
  const Region empty = Region::FromBox(b).WithAffine(AffineFunction(V({1.0, 0.0}), 5.0));
  EXPECT_TRUE(SlicePolygon(empty, b, 0, 1, V({0.0, 0.0})).empty());
}

TEST(Plot, SliceSvgOnePolygonPerRegion) {
  const MpProblem p = GenRandom({ProblemKind::kMilp, 5, 1});
  const CertPartition part = BnbCertSerial(RegionTuple::Initial(p), p, DefaultSettings(p));
  int polygons = 0;
  const std::string svg = SliceSvg(p, part, {}, &polygons);
  EXPECT_GT(polygons, 0);
  EXPECT_LE(polygons, static_cast<int>(part.regions.size()));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_THROW(SliceSvg(PTiny(), part, {}), std::invalid_argument);
  SliceOptions bad;
  bad.ay = 0;
  EXPECT_THROW(SliceSvg(p, part, bad), std::invalid_argument);
}

TEST(Plot, LineChart) {
  const std::string svg =
      LineChartSvg("a<b", "P", "speed-up", {{"dyn", {{1, 1}, {2, 1.8}}, false}, {"ideal", {{1, 1}, {2, 2}}, true}});
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(svg.find("data-name=\"dyn\""), std::string::npos);
}

}  // namespace
}  // namespace mpcert

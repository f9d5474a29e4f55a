// SPDX-License-Identifier: Apache-2.0

#include "mpcert/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpcert {

namespace {

constexpr const char* kPartitionFormat = "mpcert-partition-v1";

[[noreturn]] void Fail(const std::string& what) { throw InputError(what); }

Json EncodeVector(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(EncodeDouble(v(i)));
  return a;
}

Vector DecodeVector(const Json& j, int expected = -1) {
  if (!j.is_array()) Fail("expected an array of numbers");
  if (expected >= 0 && static_cast<int>(j.size()) != expected) {
    Fail("expected " + std::to_string(expected) + " entries, got " +
         std::to_string(j.size()));
  }
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = DecodeDouble(j[i]);
  return v;
}

Json EncodeMatrix(const Matrix& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) rows.push_back(EncodeVector(M.row(i).transpose()));
  return rows;
}

Matrix DecodeMatrix(const Json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    Fail("matrix must have " + std::to_string(rows) + " rows");
  }
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i) M.row(i) = DecodeVector(j[i], cols).transpose();
  return M;
}

Json EncodeAffine(const AffineFunction& g) {
  return Json{{"coeffs", EncodeVector(g.coeffs())}, {"offset", EncodeDouble(g.offset())}};
}

AffineFunction DecodeAffine(const Json& j, int dim) {
  return {DecodeVector(j.at("coeffs"), dim), DecodeDouble(j.at("offset"))};
}

Json EncodeQuadratic(const QuadraticFunction& q) {
  return Json{{"quad", EncodeMatrix(q.quad())},
              {"coeffs", EncodeVector(q.coeffs())},
              {"offset", EncodeDouble(q.offset())}};
}

QuadraticFunction DecodeQuadratic(const Json& j, int dim) {
  return {DecodeMatrix(j.at("quad"), dim, dim), DecodeVector(j.at("coeffs"), dim),
          DecodeDouble(j.at("offset"))};
}

Json EncodeAffineList(const std::vector<AffineFunction>& list) {
  Json a = Json::array();
  for (const AffineFunction& g : list) a.push_back(EncodeAffine(g));
  return a;
}

std::vector<AffineFunction> DecodeAffineList(const Json& j, int dim) {
  std::vector<AffineFunction> out;
  for (const Json& e : j) out.push_back(DecodeAffine(e, dim));
  return out;
}

Json EncodeAffineMap(const AffineMap& m) {
  return Json{{"lin", EncodeMatrix(m.lin)}, {"off", EncodeVector(m.off)}};
}

AffineMap DecodeAffineMap(const Json& j, int dim) {
  const Vector off = DecodeVector(j.at("off"));
  return {DecodeMatrix(j.at("lin"), static_cast<int>(off.size()), dim), off};
}

Json EncodeNode(const Node& n) {
  return Json{{"zero", n.fixed_zero}, {"one", n.fixed_one}};
}

Node DecodeNode(const Json& j) {
  Node n;
  n.fixed_zero = j.at("zero").get<std::vector<int>>();
  n.fixed_one = j.at("one").get<std::vector<int>>();
  return n;
}

Json EncodeNodes(const std::vector<Node>& nodes) {
  Json a = Json::array();
  for (const Node& n : nodes) a.push_back(EncodeNode(n));
  return a;
}

std::vector<Node> DecodeNodes(const Json& j) {
  std::vector<Node> out;
  for (const Json& e : j) out.push_back(DecodeNode(e));
  return out;
}

template <typename F>
auto Guard(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    Fail("invalid " + what + ": " + e.what());
  }
}

}  // namespace

std::string EncodeDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double DecodeDouble(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) Fail("expected a number or decimal string");
  const std::string& s = j.get_ref<const std::string&>();
  if (s.empty()) Fail("empty number string");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) Fail("malformed number '" + s + "'");
  return v;
}

// ---------------------------------------------------------------- problem

Json ProblemToJson(const MpProblem& p) {
  Json j;
  j["kind"] = ToString(p.kind);
  j["n_c"] = p.n_c;
  j["n_b"] = p.n_b;
  j["binary_set"] = p.binary_set;
  if (p.kind == ProblemKind::kMilp) {
    j["c"] = EncodeVector(p.c);
  } else {
    j["H"] = EncodeMatrix(p.H);
    j["f"] = EncodeVector(p.f);
    j["f_theta"] = EncodeMatrix(p.f_theta);
  }
  j["A"] = EncodeMatrix(p.A);
  j["b"] = EncodeVector(p.b);
  j["W"] = EncodeMatrix(p.W);
  j["theta_lower"] = EncodeVector(p.theta0.lower);
  j["theta_upper"] = EncodeVector(p.theta0.upper);
  return j;
}

MpProblem ProblemFromJson(const Json& j) {
  return Guard("problem", [&] {
    MpProblem p;
    p.kind = ParseProblemKind(j.at("kind").get<std::string>());
    p.n_c = j.at("n_c").get<int>();
    p.n_b = j.at("n_b").get<int>();
    if (p.n_c < 0 || p.n_b < 0) Fail("n_c and n_b must be nonnegative");
    p.binary_set = j.at("binary_set").get<std::vector<int>>();
    const int n = p.n();
    p.theta0.lower = DecodeVector(j.at("theta_lower"));
    const int d = p.theta_dim();
    p.theta0.upper = DecodeVector(j.at("theta_upper"), d);
    p.b = DecodeVector(j.at("b"));
    const int m = static_cast<int>(p.b.size());
    p.A = DecodeMatrix(j.at("A"), m, n);
    p.W = DecodeMatrix(j.at("W"), m, d);
    if (p.kind == ProblemKind::kMilp) {
      p.c = DecodeVector(j.at("c"), n);
    } else {
      p.H = DecodeMatrix(j.at("H"), n, n);
      p.f = DecodeVector(j.at("f"), n);
      p.f_theta = DecodeMatrix(j.at("f_theta"), n, d);
    }
    p.Validate();
    return p;
  });
}

// ---------------------------------------------------------------- geometry

Json ValueFunctionToJson(const ValueFunction& v) {
  if (v.IsPlusInfinity()) return Json{{"type", "+inf"}};
  if (v.IsMinusInfinity()) return Json{{"type", "-inf"}};
  if (v.IsAffine()) {
    Json j = EncodeAffine(v.affine());
    j["type"] = "affine";
    return j;
  }
  Json j = EncodeQuadratic(v.quadratic());
  j["type"] = "quadratic";
  return j;
}

ValueFunction ValueFunctionFromJson(const Json& j, int dim) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "+inf") return ValueFunction::Plus();
  if (type == "-inf") return ValueFunction::Minus();
  if (type == "affine") return ValueFunction(DecodeAffine(j, dim));
  if (type == "quadratic") return ValueFunction(DecodeQuadratic(j, dim));
  Fail("unknown value function type '" + type + "'");
}

Json RegionToJson(const Region& region) {
  Json affine = Json::array();
  for (int k = 0; k < region.num_affine(); ++k) affine.push_back(EncodeAffine(region.Affine(k)));
  Json quadratic = Json::array();
  for (const QuadraticFunction& q : region.quadratic()) quadratic.push_back(EncodeQuadratic(q));
  Json j{{"affine", affine}, {"quadratic", quadratic}};
  if (const auto& ball = region.inscribed()) {
    j["inscribed"] = Json{{"center", EncodeVector(ball->center)},
                          {"radius", EncodeDouble(ball->radius)}};
  }
  return j;
}

Region RegionFromJson(const Json& j, int dim) {
  Region region = Region(dim).WithAffineConstraints(DecodeAffineList(j.at("affine"), dim));
  for (const Json& q : j.at("quadratic")) region = region.WithQuadratic(DecodeQuadratic(q, dim));
  if (j.contains("inscribed")) {
    const Json& b = j["inscribed"];
    region = region.WithInscribed(
        Ball{DecodeVector(b.at("center"), dim), DecodeDouble(b.at("radius"))});
  }
  return region;
}

Json EngineStateToJson(const EngineState& s) {
  Json j;
  j["kind"] = ToString(s.kind);
  j["iterations"] = s.iterations;
  j["cursor"] = s.cursor;
  j["basis"] = s.basis;
  j["pivots"] = s.pivots;
  j["working_set"] = s.working_set;
  j["x"] = EncodeAffineMap(s.x);
  j["u"] = EncodeAffineMap(s.u);
  j["adding"] = s.adding;
  j["u_adding"] = EncodeAffine(s.u_adding);
  return j;
}

EngineState EngineStateFromJson(const Json& j, int dim) {
  return Guard("engine state", [&] {
    EngineState s;
    s.kind = ParseProblemKind(j.at("kind").get<std::string>());
    s.iterations = j.at("iterations").get<int>();
    s.cursor = j.at("cursor").get<int>();
    s.basis = j.at("basis").get<std::vector<int>>();
    s.pivots = j.value("pivots", std::vector<std::pair<int, int>>{});
    s.working_set = j.at("working_set").get<std::vector<int>>();
    s.x = DecodeAffineMap(j.at("x"), dim);
    s.u = DecodeAffineMap(j.at("u"), dim);
    s.adding = j.at("adding").get<int>();
    const Json& ua = j.at("u_adding");
    s.u_adding = ua.at("coeffs").empty() ? AffineFunction() : DecodeAffine(ua, dim);
    return s;
  });
}

// ---------------------------------------------------------------- tuples

Json TupleToJson(const RegionTuple& t) {
  Json j;
  j["region"] = RegionToJson(t.region);
  j["fingerprint"] = t.region.Fingerprint();
  j["kappa_iter"] = t.kappa_iter;
  j["kappa_node"] = t.kappa_node;
  j["upper"] = ValueFunctionToJson(t.upper);
  j["incumbent"] = EncodeAffineList(t.incumbent);
  j["nodes"] = EncodeNodes(t.trail.ToVector());
  j["state"] = ToString(t.state);
  if (!t.pending.empty()) j["pending"] = EncodeNodes(t.pending);
  if (!t.lower.IsPlusInfinity() || !t.lower_optimizer.empty()) {
    j["lower"] = ValueFunctionToJson(t.lower);
    j["lower_optimizer"] = EncodeAffineList(t.lower_optimizer);
  }
  if (t.current) j["current"] = EncodeNode(*t.current);
  if (t.engine_state) j["engine_state"] = EngineStateToJson(*t.engine_state);
  return j;
}

RegionTuple TupleFromJson(const Json& j, int dim) {
  return Guard("region tuple", [&] {
    RegionTuple t;
    t.region = RegionFromJson(j.at("region"), dim);
    t.kappa_iter = j.at("kappa_iter").get<int>();
    t.kappa_node = j.at("kappa_node").get<int>();
    t.upper = ValueFunctionFromJson(j.at("upper"), dim);
    if (t.upper.IsMinusInfinity()) Fail("incumbent bound cannot be -inf");
    t.incumbent = DecodeAffineList(j.at("incumbent"), dim);
    for (Node& n : DecodeNodes(j.at("nodes"))) t.trail = t.trail.Append(std::move(n));
    t.state = ParseTupleState(j.at("state").get<std::string>());
    if (j.contains("pending")) t.pending = DecodeNodes(j["pending"]);
    if (j.contains("lower")) {
      t.lower = ValueFunctionFromJson(j["lower"], dim);
      t.lower_optimizer = DecodeAffineList(j.at("lower_optimizer"), dim);
    }
    if (j.contains("current")) t.current = DecodeNode(j["current"]);
    if (j.contains("engine_state")) t.engine_state = EngineStateFromJson(j["engine_state"], dim);
    if ((t.state == TupleState::kCC || t.state == TupleState::kUnFin) && !t.current) {
      Fail("tuple in state " + ToString(t.state) + " lacks its current node");
    }
    if (t.state == TupleState::kUnFin && !t.engine_state) Fail("UnFin tuple lacks engine state");
    return t;
  });
}

Json PartitionToJson(const CertPartition& partition, const MpProblem& problem) {
  const Provenance& pv = partition.provenance;
  Json prov{{"algorithm", pv.algorithm},
            {"r", EncodeDouble(pv.r)},
            {"n_p", pv.n_p},
            {"workers", pv.workers},
            {"seed", pv.seed}};
  prov["n_max"] = pv.n_max ? Json(*pv.n_max) : Json(nullptr);
  const WorstCase wc = ComputeWorstCase(partition);
  Json regions = Json::array();
  for (const RegionTuple& t : partition.regions) regions.push_back(TupleToJson(t));
  return Json{{"format", kPartitionFormat},
              {"kind", ToString(problem.kind)},
              {"theta_dim", problem.theta_dim()},
              {"provenance", prov},
              {"worst_case",
               {{"kappa_iter", wc.kappa_iter},
                {"kappa_node", wc.kappa_node},
                {"undecided_regions", wc.undecided_regions},
                {"undecided_kappa_iter", wc.undecided_kappa_iter},
                {"undecided_kappa_node", wc.undecided_kappa_node}}},
              {"regions", regions}};
}

CertPartition PartitionFromJson(const Json& j, int dim) {
  return Guard("partition", [&] {
    if (j.value("format", std::string()) != kPartitionFormat) {
      Fail(std::string("partition format must be '") + kPartitionFormat + "'");
    }
    if (j.at("theta_dim").get<int>() != dim) Fail("partition and problem dimensions differ");
    CertPartition part;
    const Json& pv = j.at("provenance");
    part.provenance.algorithm = pv.at("algorithm").get<std::string>();
    part.provenance.r = DecodeDouble(pv.at("r"));
    part.provenance.n_p = pv.at("n_p").get<int>();
    part.provenance.workers = pv.at("workers").get<int>();
    part.provenance.seed = pv.at("seed").get<std::uint64_t>();
    if (!pv.at("n_max").is_null()) part.provenance.n_max = pv["n_max"].get<int>();
    for (const Json& t : j.at("regions")) part.regions.push_back(TupleFromJson(t, dim));
    return part;
  });
}

// ---------------------------------------------------------------- files

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    Fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

MpProblem LoadProblem(const std::string& path) {
  const Json j = ReadJsonFile(path);
  try {
    return ProblemFromJson(j);
  } catch (const InputError& e) {
    Fail("'" + path + "': " + e.what());
  }
}

void SaveProblem(const std::string& path, const MpProblem& problem) {
  WriteJsonFile(path, ProblemToJson(problem));
}

CertPartition LoadPartition(const std::string& path, int dim) {
  const Json j = ReadJsonFile(path);
  try {
    return PartitionFromJson(j, dim);
  } catch (const InputError& e) {
    Fail("'" + path + "': " + e.what());
  }
}

void SavePartition(const std::string& path, const CertPartition& partition,
                   const MpProblem& problem) {
  WriteJsonFile(path, PartitionToJson(partition, problem));
}

// ---------------------------------------------------------------- metrics

std::string MetricsCsvHeader() {
  return "algorithm,r,P,n_max,wall_s,peak_S,outer_iters,regions,worst_kappa_iter,"
         "worst_kappa_node,seed";
}

std::string MetricsCsvRow(const RunMetrics& m, const WorstCase& wc, std::uint64_t seed) {
  std::ostringstream os;
  os << m.algorithm << ',' << EncodeDouble(m.r) << ',' << m.workers << ','
     << (m.n_max ? std::to_string(*m.n_max) : std::string()) << ','
     << EncodeDouble(m.wall_s) << ',' << m.peak << ',' << m.outer_iterations << ','
     << m.regions << ',' << wc.kappa_iter << ',' << wc.kappa_node << ',' << seed;
  return os.str();
}

void AppendMetricsCsv(const std::string& path, const RunMetrics& metrics,
                      const WorstCase& worst, std::uint64_t seed) {
  bool fresh = true;
  {
    std::ifstream in(path);
    fresh = !in || in.peek() == std::ifstream::traits_type::eof();
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  if (fresh) out << MetricsCsvHeader() << '\n';
  out << MetricsCsvRow(metrics, worst, seed) << '\n';
}

std::vector<MetricsRecord> ReadMetricsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != MetricsCsvHeader()) {
    Fail("'" + path + "' lacks the metrics CSV header");
  }
  std::vector<MetricsRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) Fail("'" + path + "' line " + std::to_string(lineno) + ": expected 11 fields");
    try {
      MetricsRecord r;
      r.algorithm = f[0];
      r.r = std::stod(f[1]);
      r.workers = std::stoi(f[2]);
      r.n_max = f[3];
      r.wall_s = std::stod(f[4]);
      r.peak = std::stoi(f[5]);
      r.outer_iterations = std::stoi(f[6]);
      r.regions = std::stoll(f[7]);
      r.worst_kappa_iter = std::stoi(f[8]);
      r.worst_kappa_node = std::stoi(f[9]);
      r.seed = std::stoull(f[10]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      Fail("'" + path + "' line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return out;
}

}  // namespace mpcert

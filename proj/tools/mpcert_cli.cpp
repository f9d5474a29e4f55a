// SPDX-License-Identifier: Apache-2.0
//
// mpcert: generate | certify | verify | bench | plot.
// Exit codes: 0 ok, 2 verification mismatch, 3 covering violation,
// 4 input error, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/instances.hpp"
#include "mpcert/io.hpp"
#include "mpcert/parallel.hpp"
#include "mpcert/plot.hpp"
#include "mpcert/verify.hpp"

namespace fs = std::filesystem;
using namespace mpcert;

namespace {

constexpr int kExitMismatch = 2;
constexpr int kExitCovering = 3;
constexpr int kExitInput = 4;

void PrintDims(const MpProblem& p, std::ostream& os) {
  os << "kind=" << ToString(p.kind) << " n=" << p.n() << " n_c=" << p.n_c << " n_b=" << p.n_b
     << " m=" << p.m() << " n_theta=" << p.theta_dim() << '\n';
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::string OutPath(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  fs::create_directories(dir);
  return (fs::path(dir) / file).string();
}

// "L=R" entries of a level table.
std::map<int, double> ParseLevels(const std::vector<std::string>& entries) {
  std::map<int, double> levels;
  for (const std::string& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw InputError("level ratio '" + e + "' must look like L=R");
    try {
      levels[std::stoi(e.substr(0, eq))] = std::stod(e.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("level ratio '" + e + "' must look like L=R");
    }
  }
  return levels;
}

int WorkersFromEnv(int fallback) {
  const char* env = std::getenv("CERT_WORKERS");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw InputError(std::string("CERT_WORKERS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(v);
}

// ------------------------------------------------------------------ generate

struct GenerateArgs {
  std::string kind = "milp";
  int nb = 5;
  std::uint64_t seed = 1;
  bool tiny = false;
  bool pendulum = false;
  int horizon = 1;
  std::string fixture;
  std::string out;
};

int RunGenerate(const GenerateArgs& a) {
  MpProblem p;
  if (a.tiny) {
    p = PTiny();
  } else if (a.pendulum) {
    p = PendulumMiqp({a.horizon, a.fixture});
  } else {
    p = GenRandom({ParseProblemKind(a.kind), a.nb, a.seed});
  }
  if (a.out.empty() || a.out == "-") {
    std::cout << ProblemToJson(p).dump(1) << '\n';
  } else {
    SaveProblem(a.out, p);
    std::cout << "wrote " << a.out << ": ";
  }
  PrintDims(p, a.out.empty() || a.out == "-" ? std::cerr : std::cout);
  return 0;
}

// ------------------------------------------------------------------ certify

struct CertifyArgs {
  std::string problem;
  std::string algorithm = "serial";
  double r = 0.0;
  std::vector<std::string> r_levels;
  int n_p = 1;
  int n_max = 0;
  int workers = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string partition = "partition.json";
  std::string metrics = "metrics.csv";
  std::string trace;
};

int RunCertify(const CertifyArgs& a) {
  const MpProblem p = LoadProblem(a.problem);
  RunConfig cfg;
  cfg.algorithm = ParseAlgorithm(a.algorithm);
  cfg.r = a.r;
  cfg.r_levels = ParseLevels(a.r_levels);
  cfg.n_p = a.n_p;
  if (a.n_max > 0) cfg.n_max = a.n_max;
  cfg.workers = WorkersFromEnv(a.workers);
  cfg.seed = a.seed;
  try {
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  RunMetrics metrics;
  const CertPartition part = RunCertification(p, cfg, DefaultSettings(p), &metrics);
  const WorstCase wc = ComputeWorstCase(part);

  const std::string part_path = OutPath(a.out_dir, a.partition);
  SavePartition(part_path, part, p);
  const std::string metrics_path = OutPath(a.out_dir, a.metrics);
  AppendMetricsCsv(metrics_path, metrics, wc, a.seed);
  if (!a.trace.empty()) {
    std::ostringstream os;
    os << "outer_iter,size\n";
    for (std::size_t i = 0; i < metrics.trace.size(); ++i) os << i + 1 << ',' << metrics.trace[i] << '\n';
    WriteText(OutPath(a.out_dir, a.trace), os.str());
  }
  std::cout << "algorithm=" << metrics.algorithm << " P=" << cfg.workers << " regions=" << part.regions.size()
            << " wall_s=" << metrics.wall_s << " peak_S=" << metrics.peak
            << " outer_iters=" << metrics.outer_iterations << '\n';
  std::cout << "worst_case kappa_iter=" << wc.kappa_iter << " kappa_node=" << wc.kappa_node << '\n';
  if (wc.undecided_regions > 0) {
    std::cout << "undecided regions=" << wc.undecided_regions << " kappa_iter<=" << wc.undecided_kappa_iter
              << " kappa_node<=" << wc.undecided_kappa_node << '\n';
  }
  std::cout << "wrote " << part_path << " and " << metrics_path << '\n';
  return 0;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string problem;
  std::string partition;
  int samples = 1000;
  std::string mode = "auto";
  bool no_sequences = false;
  double value_rtol = -1.0;
};

int RunVerify(const VerifyArgs& a) {
  const MpProblem p = LoadProblem(a.problem);
  const CertPartition part = LoadPartition(a.partition, p.theta_dim());
  VerifyOptions opt;
  opt.samples = a.samples;
  if (a.samples < 1) throw InputError("--samples must be >= 1");
  if (a.mode == "grid") {
    opt.mode = SampleMode::kGrid;
  } else if (a.mode == "sobol") {
    opt.mode = SampleMode::kSobol;
  } else if (a.mode != "auto") {
    throw InputError("--mode must be auto, grid or sobol");
  }
  opt.compare_sequences = !a.no_sequences;
  if (a.value_rtol >= 0.0) opt.value_rtol = a.value_rtol;
  const VerifyReport r = Verify(p, part, opt);
  std::cout << "samples=" << r.samples << " checked=" << r.checked
            << " boundary_skipped=" << r.boundary_skipped << '\n'
            << "mismatches=" << r.mismatches() << " (kappa=" << r.kappa_mismatches
            << " sequence=" << r.sequence_mismatches << " value=" << r.value_mismatches
            << " overlap=" << r.overlap_conflicts << ")\n"
            << "covering_violations=" << r.covering_violations << '\n'
            << "sampled_max kappa_iter=" << r.sampled_max_iter << " kappa_node=" << r.sampled_max_node
            << "; certified kappa_iter=" << r.certified.kappa_iter
            << " kappa_node=" << r.certified.kappa_node << '\n';
  if (r.covering_violations > 0) return kExitCovering;
  if (r.mismatches() > 0) return kExitMismatch;
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  std::string kind = "milp";
  int nb = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::string> problems;
  std::vector<std::string> algorithms{"static", "dyn"};
  std::vector<int> workers{1, 2, 4};
  double r = 0.8;
  int reps = 3;
  std::string out = "speedup.csv";
  std::string json;
};

int RunBench(const BenchArgs& a) {
  std::vector<MpProblem> problems;
  for (const std::string& f : a.problems) problems.push_back(LoadProblem(f));
  if (problems.empty()) {
    for (std::uint64_t s : a.seeds) problems.push_back(GenRandom({ParseProblemKind(a.kind), a.nb, s}));
  }
  std::vector<Algorithm> algs;
  for (const std::string& s : a.algorithms) algs.push_back(ParseAlgorithm(s));
  for (int w : a.workers) {
    if (w < 1) throw InputError("worker counts must be >= 1");
  }
  const std::vector<SpeedupRow> rows = SpeedupBench(problems, algs, a.workers, RatioSchedule(a.r), a.reps);
  std::ostringstream os;
  os << "algorithm,P,r,serial_s,parallel_s,speedup\n";
  Json j = Json::array();
  for (const SpeedupRow& row : rows) {
    os << row.algorithm << ',' << row.workers << ',' << EncodeDouble(row.r) << ','
       << EncodeDouble(row.serial_s) << ',' << EncodeDouble(row.parallel_s) << ','
       << EncodeDouble(row.speedup) << '\n';
    j.push_back({{"algorithm", row.algorithm},
                 {"P", row.workers},
                 {"r", row.r},
                 {"serial_s", row.serial_s},
                 {"parallel_s", row.parallel_s},
                 {"speedup", row.speedup}});
    std::cout << row.algorithm << " P=" << row.workers << " speedup=" << row.speedup << '\n';
  }
  WriteText(a.out, os.str());
  if (!a.json.empty()) WriteJsonFile(a.json, Json{{"baseline", "serial"}, {"rows", j}});
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

// ------------------------------------------------------------------ plot

struct PlotArgs {
  std::string what;
  std::vector<std::string> inputs;  // worst-case: NB=metrics.csv entries
  std::string problem;
  std::string partition;
  int ax = 0;
  int ay = 1;
  std::vector<double> anchor;
  bool color_iter = false;
  std::string out = "plot";
};

std::vector<std::vector<std::string>> ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    rows.push_back(std::move(f));
  }
  return rows;
}

int RunPlot(const PlotArgs& a) {
  if (a.what == "worst-case") {
    Series iter{"avg worst-case iterations", {}, false};
    Series node{"avg worst-case nodes", {}, true};
    std::ostringstream csv;
    csv << "n_b,runs,avg_worst_kappa_iter,avg_worst_kappa_node\n";
    for (const std::string& e : a.inputs) {
      const auto eq = e.find('=');
      if (eq == std::string::npos) throw InputError("worst-case input '" + e + "' must look like NB=metrics.csv");
      int nb = 0;
      try {
        nb = std::stoi(e.substr(0, eq));
      } catch (const std::exception&) {
        throw InputError("worst-case input '" + e + "' must look like NB=metrics.csv");
      }
      const std::vector<MetricsRecord> rec = ReadMetricsCsv(e.substr(eq + 1));
      if (rec.empty()) throw InputError("'" + e.substr(eq + 1) + "' has no rows");
      double si = 0, sn = 0;
      for (const MetricsRecord& r : rec) {
        si += r.worst_kappa_iter;
        sn += r.worst_kappa_node;
      }
      iter.points.push_back({nb, si / rec.size()});
      node.points.push_back({nb, sn / rec.size()});
      csv << nb << ',' << rec.size() << ',' << si / rec.size() << ',' << sn / rec.size() << '\n';
    }
    WriteText(a.out + ".csv", csv.str());
    WriteText(a.out + ".svg", LineChartSvg("Average worst-case complexity", "n_b", "count", {iter, node}));
  } else if (a.what == "speedup") {
    if (a.inputs.size() != 1) throw InputError("speedup plot takes one bench CSV");
    const auto rows = ReadCsv(a.inputs[0]);
    if (rows.empty() || rows[0].size() != 6 || rows[0][0] != "algorithm") {
      throw InputError("'" + a.inputs[0] + "' is not a bench CSV");
    }
    std::map<std::string, Series> by_alg;
    double max_p = 1;
    std::ostringstream csv;
    csv << "algorithm,P,speedup\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 6) throw InputError("malformed bench row");
      const double p = std::stod(rows[i][1]), s = std::stod(rows[i][5]);
      by_alg[rows[i][0]].name = rows[i][0];
      by_alg[rows[i][0]].dashed = rows[i][0] == "static";
      by_alg[rows[i][0]].points.push_back({p, s});
      max_p = std::max(max_p, p);
      csv << rows[i][0] << ',' << rows[i][1] << ',' << rows[i][5] << '\n';
    }
    std::vector<Series> series{{"ideal (linear)", {{1, 1}, {max_p, max_p}}, true}};
    for (auto& [name, s] : by_alg) series.push_back(s);
    WriteText(a.out + ".csv", csv.str());
    WriteText(a.out + ".svg", LineChartSvg("Speed-up", "workers", "speed-up", series));
  } else if (a.what == "trace") {
    Series s{"|S_d|", {}, false};
    std::ostringstream csv;
    csv << "run,outer_iter,size\n";
    std::vector<Series> series;
    for (const std::string& f : a.inputs) {
      const auto rows = ReadCsv(f);
      if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "outer_iter") {
        throw InputError("'" + f + "' is not a trace CSV");
      }
      Series t{fs::path(f).stem().string(), {}, !series.empty()};
      for (std::size_t i = 1; i < rows.size(); ++i) {
        t.points.push_back({std::stod(rows[i][0]), std::stod(rows[i][1])});
        csv << t.name << ',' << rows[i][0] << ',' << rows[i][1] << '\n';
      }
      series.push_back(std::move(t));
    }
    WriteText(a.out + ".csv", csv.str());
    WriteText(a.out + ".svg", LineChartSvg("Stored tuples per outer iteration", "outer iteration",
                                           "|S_d|", series));
  } else if (a.what == "slice") {
    const MpProblem p = LoadProblem(a.problem);
    const CertPartition part = LoadPartition(a.partition, p.theta_dim());
    SliceOptions opt;
    opt.ax = a.ax;
    opt.ay = a.ay;
    opt.color_by_nodes = !a.color_iter;
    if (!a.anchor.empty()) opt.anchor = Eigen::Map<const Vector>(a.anchor.data(), a.anchor.size());
    int polygons = 0;
    std::string svg;
    try {
      svg = SliceSvg(p, part, opt, &polygons);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    WriteText(a.out + ".svg", svg);
    std::cout << "polygons=" << polygons << '\n';
  } else {
    throw InputError("plot kind must be worst-case, speedup, trace or slice");
  }
  std::cout << "wrote " << a.out << (a.what == "slice" ? ".svg" : ".csv/.svg") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case complexity certification of branch and bound for mp-MILP/mp-MIQP"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "write a problem JSON file");
  g->add_option("--kind", gen.kind, "milp or miqp")->check(CLI::IsMember({"milp", "miqp"}));
  g->add_option("--nb", gen.nb, "number of binaries")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_flag("--tiny", gen.tiny, "the two-variable test instance");
  g->add_flag("--pendulum", gen.pendulum, "cart-pole MPC instance");
  g->add_option("--horizon", gen.horizon, "pendulum horizon N")->check(CLI::PositiveNumber);
  g->add_option("--fixture", gen.fixture, "pendulum model JSON");
  g->add_option("-o,--out", gen.out, "output file ('-' or empty for stdout)");

  CertifyArgs cert;
  CLI::App* c = app.add_subcommand("certify", "certify worst-case complexity over Theta0");
  c->add_option("--problem", cert.problem)->required();
  c->add_option("--algorithm", cert.algorithm, "serial, serial-mod, static, dyn, dyn-mod");
  c->add_option("--r", cert.r, "distribution ratio");
  c->add_option("--r-level", cert.r_levels, "per-level ratio L=R (repeatable)");
  c->add_option("--np", cert.n_p, "static parts");
  c->add_option("--nmax", cert.n_max, "pause threshold (0 = unset)");
  c->add_option("--workers", cert.workers, "worker threads (CERT_WORKERS overrides)");
  c->add_option("--seed", cert.seed, "seed recorded in provenance");
  c->add_option("--out-dir", cert.out_dir, "directory for outputs");
  c->add_option("--partition", cert.partition, "partition JSON file name");
  c->add_option("--metrics", cert.metrics, "metrics CSV (appended)");
  c->add_option("--trace", cert.trace, "write the |S_d| trace CSV");

  VerifyArgs ver;
  CLI::App* v = app.add_subcommand("verify", "compare a partition with the online solver");
  v->add_option("--problem", ver.problem)->required();
  v->add_option("--partition", ver.partition)->required();
  v->add_option("-G,--samples", ver.samples, "number of sample points");
  v->add_option("--mode", ver.mode, "auto, grid or sobol");
  v->add_flag("--no-sequences", ver.no_sequences, "skip node-sequence comparison");
  v->add_option("--value-rtol", ver.value_rtol, "also compare the incumbent value");

  BenchArgs bench;
  CLI::App* b = app.add_subcommand("bench", "speed-up benchmark against the serial baseline");
  b->add_option("--kind", bench.kind)->check(CLI::IsMember({"milp", "miqp"}));
  b->add_option("--nb", bench.nb)->check(CLI::PositiveNumber);
  b->add_option("--seeds", bench.seeds);
  b->add_option("--problem", bench.problems, "problem files instead of generated ones");
  b->add_option("--algorithms", bench.algorithms)->delimiter(',');
  b->add_option("--workers", bench.workers)->delimiter(',');
  b->add_option("--r", bench.r);
  b->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
  b->add_option("-o,--out", bench.out);
  b->add_option("--json", bench.json, "baseline-comparison JSON");

  PlotArgs plot;
  CLI::App* pl = app.add_subcommand("plot", "CSV + SVG outputs");
  pl->add_option("what", plot.what, "worst-case, speedup, trace or slice")->required();
  pl->add_option("--input", plot.inputs, "input files (worst-case: NB=metrics.csv)");
  pl->add_option("--problem", plot.problem);
  pl->add_option("--partition", plot.partition);
  pl->add_option("--ax", plot.ax);
  pl->add_option("--ay", plot.ay);
  pl->add_option("--anchor", plot.anchor, "values of all parameters for the slice plane")->delimiter(',');
  pl->add_flag("--color-iter", plot.color_iter, "color by iterations instead of nodes");
  pl->add_option("-o,--out", plot.out, "output path without extension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*g) return RunGenerate(gen);
    if (*c) return RunCertify(cert);
    if (*v) return RunVerify(ver);
    if (*b) return RunBench(bench);
    if (*pl) return RunPlot(plot);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

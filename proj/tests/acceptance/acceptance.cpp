// SPDX-License-Identifier: Apache-2.0
//
// Acceptance runner. Each criterion runs under a wall-clock budget; work that
// does not finish inside it is reported as timed out or not attempted, and
// the criterion then fails. Set MPCERT_ACCEPT_SCALE to stretch every budget
// (0 removes the limits).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/instances.hpp"
#include "mpcert/io.hpp"
#include "mpcert/parallel.hpp"
#include "mpcert/verify.hpp"

namespace mpcert {
namespace {

using Clock = std::chrono::steady_clock;

class Budget {
 public:
  explicit Budget(double seconds) : start_(Clock::now()) {
    if (seconds > 0) end_ = start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  }
  bool Expired() const { return end_ && Clock::now() >= *end_; }
  /// Deadline for one unit of work capped at `cap` seconds (cap <= 0: none).
  std::optional<Clock::time_point> Deadline(double cap) const {
    std::optional<Clock::time_point> d = end_;
    if (cap > 0) {
      const auto c = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cap));
      d = d ? std::min(*d, c) : c;
    }
    return d;
  }
  double Elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_;
  std::optional<Clock::time_point> end_;
};

struct Instance {
  std::string name;
  MpProblem problem;
};

Instance Random(ProblemKind kind, int nb, int seed) {
  std::ostringstream os;
  os << ToString(kind) << " nb=" << nb << " seed=" << seed;
  return {os.str(), GenRandom({kind, nb, static_cast<std::uint64_t>(seed)})};
}

std::vector<Instance> Family(ProblemKind kind, int nb, int seeds) {
  std::vector<Instance> out;
  for (int s = 1; s <= seeds; ++s) out.push_back(Random(kind, nb, s));
  return out;
}

// Tiers of the pointwise-equivalence set, cheapest first.
std::vector<std::pair<std::string, std::vector<Instance>>> OracleSet() {
  return {{"milp nb=2", Family(ProblemKind::kMilp, 2, 25)},
          {"milp nb=3", Family(ProblemKind::kMilp, 3, 25)},
          {"miqp nb=2", Family(ProblemKind::kMiqp, 2, 10)},
          {"miqp nb=3", Family(ProblemKind::kMiqp, 3, 10)},
          {"miqp nb=4", Family(ProblemKind::kMiqp, 4, 10)},
          {"milp nb=5", Family(ProblemKind::kMilp, 5, 25)},
          {"miqp nb=5", Family(ProblemKind::kMiqp, 5, 10)},
          {"milp nb=8", Family(ProblemKind::kMilp, 8, 25)},
          {"milp nb=10", Family(ProblemKind::kMilp, 10, 25)}};
}

/// Certification that gives up at the deadline.
std::optional<CertPartition> Certify(const MpProblem& p, const RunConfig& cfg,
                                     std::optional<Clock::time_point> deadline,
                                     RunMetrics* metrics = nullptr) {
  CertSettings s = DefaultSettings(p);
  s.engine.deadline = deadline;
  RunMetrics local;
  try {
    return RunCertification(p, cfg, s, metrics ? metrics : &local);
  } catch (const DeadlineExceeded&) {
    return std::nullopt;
  }
}

RunConfig Config(Algorithm a, double r = 0.0, int workers = 1, std::optional<int> n_max = {},
                 int n_p = 1) {
  RunConfig c;
  c.algorithm = a;
  c.r = r;
  c.workers = workers;
  c.n_max = n_max;
  c.n_p = n_p;
  return c;
}

std::string SavePartitionString(const CertPartition& part, const MpProblem& problem) {
  return PartitionToJson(part, problem).dump();
}

// Region with the largest margin at theta, or null within `margin` of every boundary.
const RegionTuple* Locate(const CertPartition& part, const Vector& theta, double margin = 1e-7) {
  const RegionTuple* best = nullptr;
  double m = margin;
  for (const RegionTuple& t : part.regions) {
    const double v = t.region.Margin(theta);
    if (v > m) {
      m = v;
      best = &t;
    }
  }
  return best;
}

struct Tally {
  int ok = 0;
  int failed = 0;
  int timed_out = 0;
  int not_attempted = 0;
  bool complete() const { return failed == 0 && timed_out == 0 && not_attempted == 0; }
  std::string Str() const {
    std::ostringstream os;
    os << "ok=" << ok << " failed=" << failed << " timed_out=" << timed_out
       << " not_attempted=" << not_attempted;
    return os.str();
  }
  Json ToJson() const {
    return {{"ok", ok}, {"failed", failed}, {"timed_out", timed_out}, {"not_attempted", not_attempted}};
  }
};

struct Outcome {
  bool pass = false;
  std::vector<std::string> lines;
  Json details = Json::object();
  void Log(const std::string& s) {
    lines.push_back(s);
    std::cout << "  " << s << std::endl;
  }
};

// ---------------------------------------------------------------------------

// Runs `check` on every certified instance of the oracle set, tier by tier.
Outcome OverOracleSet(const Budget& budget, double cap,
                      const std::function<bool(const Instance&, const CertPartition&, Outcome&)>& check) {
  Outcome out;
  Tally total;
  for (const auto& [tier, instances] : OracleSet()) {
    Tally t;
    for (const Instance& inst : instances) {
      if (budget.Expired()) {
        ++t.not_attempted;
        continue;
      }
      const auto part = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(cap));
      if (!part) {
        ++t.timed_out;
        continue;
      }
      if (check(inst, *part, out)) {
        ++t.ok;
      } else {
        ++t.failed;
      }
    }
    out.Log(tier + ": " + t.Str());
    out.details["tiers"][tier] = t.ToJson();
    total.ok += t.ok;
    total.failed += t.failed;
    total.timed_out += t.timed_out;
    total.not_attempted += t.not_attempted;
  }
  out.details["total"] = total.ToJson();
  out.pass = total.complete();
  return out;
}

Outcome Criterion1(const Budget& budget, double cap) {
  return OverOracleSet(budget, cap, [](const Instance& inst, const CertPartition& part, Outcome& out) {
    VerifyOptions o;
    o.samples = 1000;
    o.compare_sequences = false;
    const VerifyReport r = Verify(inst.problem, part, o);
    const bool ok = r.kappa_mismatches == 0 && r.overlap_conflicts == 0;
    if (!ok) {
      out.Log(inst.name + ": kappa mismatches=" + std::to_string(r.kappa_mismatches) +
              " overlap=" + std::to_string(r.overlap_conflicts));
    }
    return ok;
  });
}

Outcome Criterion2(const Budget& budget, double cap) {
  return OverOracleSet(budget, cap, [](const Instance& inst, const CertPartition& part, Outcome& out) {
    VerifyOptions o;
    o.samples = 50;
    o.compare_sequences = true;
    const VerifyReport r = Verify(inst.problem, part, o);
    if (r.sequence_mismatches != 0) {
      out.Log(inst.name + ": sequence mismatches=" + std::to_string(r.sequence_mismatches));
    }
    return r.sequence_mismatches == 0;
  });
}

Outcome Criterion3(const Budget& budget, double) {
  Outcome out;
  Tally t;
  for (const Instance& inst : Family(ProblemKind::kMilp, 10, 10)) {
    if (budget.Expired()) {
      ++t.not_attempted;
      continue;
    }
    const auto serial = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(0));
    if (!serial) {
      ++t.timed_out;
      out.Log(inst.name + ": serial run did not finish");
      continue;
    }
    const auto canon = Canonicalize(*serial);
    bool ok = true;
    for (double r : {0.4, 0.8, 1.0}) {
      for (int P : {2, 4, 8}) {
        const auto dyn = Certify(inst.problem, Config(Algorithm::kDyn, r, P), budget.Deadline(0));
        if (!dyn) {
          ok = false;
          out.Log(inst.name + ": dyn run did not finish");
          break;
        }
        if (Canonicalize(*dyn) != canon) {
          ok = false;
          out.Log(inst.name + ": dyn partition differs at r=" + std::to_string(r) + " P=" + std::to_string(P));
        }
      }
    }
    const auto zero = Certify(inst.problem, Config(Algorithm::kDyn, 0.0, 4), budget.Deadline(0));
    if (!zero || SavePartitionString(*zero, inst.problem) != SavePartitionString(*serial, inst.problem)) {
      ok = false;
      out.Log(inst.name + ": r=0 partition is not identical to serial");
    }
    ok ? ++t.ok : ++t.failed;
  }
  out.Log("milp nb=10: " + t.Str());
  out.details["instances"] = t.ToJson();
  out.pass = t.complete();
  return out;
}

Outcome Criterion4(const Budget& budget, double) {
  Outcome out;
  Tally t;
  for (const Instance& inst : Family(ProblemKind::kMilp, 10, 10)) {
    if (budget.Expired()) {
      ++t.not_attempted;
      continue;
    }
    const auto serial = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(0));
    if (!serial) {
      ++t.timed_out;
      out.Log(inst.name + ": serial run did not finish");
      continue;
    }
    bool ok = true;
    for (int n_p : {2, 4, 8}) {
      const auto stat = Certify(inst.problem, Config(Algorithm::kStatic, 0.0, n_p, {}, n_p),
                                budget.Deadline(0));
      if (!stat) {
        ok = false;
        out.Log(inst.name + ": static run did not finish");
        break;
      }
      if (stat->regions.size() < serial->regions.size()) {
        ok = false;
        out.Log(inst.name + ": static has fewer regions at n_p=" + std::to_string(n_p));
      }
      int diff = 0;
      for (const Vector& th : SamplePoints(inst.problem.theta0, 1000)) {
        const RegionTuple* a = Locate(*serial, th);
        const RegionTuple* b = Locate(*stat, th);
        if (!a || !b) continue;
        diff += a->kappa_iter != b->kappa_iter || a->kappa_node != b->kappa_node;
      }
      if (diff) {
        ok = false;
        out.Log(inst.name + ": " + std::to_string(diff) + " samples differ at n_p=" + std::to_string(n_p));
      }
    }
    ok ? ++t.ok : ++t.failed;
  }
  out.Log("milp nb=10: " + t.Str());
  out.details["instances"] = t.ToJson();
  out.pass = t.complete();
  return out;
}

Outcome Criterion5(const Budget& budget, double cap) {
  return OverOracleSet(budget, cap, [](const Instance& inst, const CertPartition& part, Outcome& out) {
    const int v = CountCoveringViolations(part, SamplePoints(inst.problem.theta0, 10000, SampleMode::kSobol));
    if (v) out.Log(inst.name + ": covering violations=" + std::to_string(v));
    return v == 0;
  });
}

Outcome Criterion6(const Budget& budget, double) {
  Outcome out;
  Tally t;
  const int n_max = 100;
  for (const Instance& inst : Family(ProblemKind::kMilp, 20, 5)) {
    if (budget.Expired()) {
      ++t.not_attempted;
      continue;
    }
    RunMetrics plain, mod;
    const auto a = Certify(inst.problem, Config(Algorithm::kDyn, 0.8, 4), budget.Deadline(0), &plain);
    const auto b = a ? Certify(inst.problem, Config(Algorithm::kDynMod, 0.8, 4, n_max), budget.Deadline(0), &mod)
                     : std::nullopt;
    if (!a || !b) {
      ++t.timed_out;
      out.Log(inst.name + ": run did not finish");
      continue;
    }
    const int bound = n_max + mod.max_round_pushes;
    bool ok = mod.peak <= bound;
    if (plain.peak > bound) ok = ok && mod.peak < plain.peak;
    ok = ok && mod.outer_iterations >= plain.outer_iterations;
    std::ostringstream os;
    os << inst.name << ": peak dyn=" << plain.peak << " dyn-mod=" << mod.peak << " bound=" << bound
       << " outer dyn=" << plain.outer_iterations << " dyn-mod=" << mod.outer_iterations;
    out.Log(os.str());
    ok ? ++t.ok : ++t.failed;
  }
  out.Log("milp nb=20: " + t.Str());
  out.details["instances"] = t.ToJson();
  out.pass = t.complete();
  return out;
}

Outcome Criterion7(const Budget& budget, double) {
  Outcome out;
  Tally t;
  std::vector<double> dyn_speedup, static_speedup;
  out.Log("hardware threads: " + std::to_string(std::thread::hardware_concurrency()));
  for (const Instance& inst : Family(ProblemKind::kMilp, 20, 5)) {
    if (budget.Expired()) {
      ++t.not_attempted;
      continue;
    }
    RunMetrics ser, dyn, stat;
    const auto a = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(0), &ser);
    const auto b = a ? Certify(inst.problem, Config(Algorithm::kDyn, 0.8, 4), budget.Deadline(0), &dyn)
                     : std::nullopt;
    const auto c = b ? Certify(inst.problem, Config(Algorithm::kStatic, 0.0, 4, {}, 4), budget.Deadline(0), &stat)
                     : std::nullopt;
    if (!c) {
      ++t.timed_out;
      out.Log(inst.name + ": run did not finish");
      continue;
    }
    dyn_speedup.push_back(ser.wall_s / dyn.wall_s);
    static_speedup.push_back(ser.wall_s / stat.wall_s);
    ++t.ok;
  }
  out.Log("milp nb=20: " + t.Str());
  out.details["instances"] = t.ToJson();
  if (!t.complete()) return out;
  const double d = Median(dyn_speedup), s = Median(static_speedup);
  out.Log("median speed-up at P=4: dyn=" + std::to_string(d) + " static=" + std::to_string(s));
  out.details["dyn_speedup"] = d;
  out.details["static_speedup"] = s;
  out.pass = d >= 1.5 && d >= s;
  return out;
}

Outcome Criterion8(const Budget& budget, double cap) {
  Outcome out;
  std::map<int, std::pair<double, double>> avg;
  bool complete = true;
  for (int nb : {5, 10}) {
    Tally t;
    double si = 0, sn = 0;
    for (const Instance& inst : Family(ProblemKind::kMilp, nb, 25)) {
      if (budget.Expired()) {
        ++t.not_attempted;
        continue;
      }
      const auto part = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(cap));
      if (!part) {
        ++t.timed_out;
        continue;
      }
      const WorstCase wc = ComputeWorstCase(*part);
      si += wc.kappa_iter;
      sn += wc.kappa_node;
      ++t.ok;
    }
    out.Log("milp nb=" + std::to_string(nb) + ": " + t.Str());
    out.details["tiers"][std::to_string(nb)] = t.ToJson();
    if (t.ok) {
      avg[nb] = {si / t.ok, sn / t.ok};
      out.Log("  average worst case over finished seeds: kappa_iter=" + std::to_string(si / t.ok) +
              " kappa_node=" + std::to_string(sn / t.ok));
    }
    complete = complete && t.complete();
  }
  out.pass = complete && avg[10].first >= avg[5].first && avg[10].second >= avg[5].second;
  return out;
}

Outcome Criterion9(const Budget& budget, double) {
  Outcome out;
  const std::map<int, std::pair<int, int>> reference{{1, {9, 4}}, {2, {22, 8}}};
  bool dims = true;
  Tally t;
  for (int N = 1; N <= 6; ++N) {
    const MpProblem p = PendulumMiqp({N, ""});
    const bool d = p.n() == 4 * N && p.n_b == 2 * N && p.m() == 19 * N;
    dims = dims && d;
    std::ostringstream os;
    os << "N=" << N << ": (n, n_b, m)=(" << p.n() << ", " << p.n_b << ", " << p.m() << ")"
       << (d ? "" : " WRONG");
    if (budget.Expired()) {
      ++t.not_attempted;
      out.Log(os.str() + " certification not attempted");
      continue;
    }
    // Later horizons share what is left of the budget.
    const auto part = Certify(p, Config(Algorithm::kSerial), budget.Deadline(0));
    if (!part) {
      ++t.timed_out;
      out.Log(os.str() + " certification did not finish");
      continue;
    }
    VerifyOptions o;
    o.samples = 500;
    const VerifyReport r = Verify(p, *part, o);
    os << " worst case kappa_iter=" << r.certified.kappa_iter << " kappa_node=" << r.certified.kappa_node;
    if (reference.count(N)) {
      os << " (reference " << reference.at(N).first << ", " << reference.at(N).second << ")";
    }
    os << " oracle mismatches=" << r.mismatches();
    out.Log(os.str());
    out.details["horizons"][std::to_string(N)] = {{"kappa_iter", r.certified.kappa_iter},
                                                  {"kappa_node", r.certified.kappa_node},
                                                  {"mismatches", r.mismatches()}};
    r.mismatches() == 0 ? ++t.ok : ++t.failed;
  }
  out.Log(std::string("dimensions ") + (dims ? "exact" : "WRONG") + "; self-consistency " + t.Str());
  out.details["self_consistency"] = t.ToJson();
  out.pass = dims && t.complete();
  return out;
}

Outcome Criterion10(const Budget& budget, double) {
  Outcome out;
  Tally t;
  for (const Instance& inst : Family(ProblemKind::kMilp, 8, 5)) {
    if (budget.Expired()) {
      ++t.not_attempted;
      continue;
    }
    const auto serial = Certify(inst.problem, Config(Algorithm::kSerial), budget.Deadline(0));
    if (!serial) {
      ++t.timed_out;
      out.Log(inst.name + ": serial run did not finish");
      continue;
    }
    bool ok = true;
    for (int n_max : {1, 10, 100}) {
      const auto mod = Certify(inst.problem, Config(Algorithm::kSerialMod, 0.0, 1, n_max), budget.Deadline(0));
      if (!mod) {
        ok = false;
        out.Log(inst.name + ": serial-mod run did not finish");
        break;
      }
      int diff = 0;
      for (const Vector& th : SamplePoints(inst.problem.theta0, 500)) {
        const RegionTuple* a = Locate(*serial, th);
        const RegionTuple* b = Locate(*mod, th);
        if (!a || !b) continue;
        const double ja = a->upper.Evaluate(th), jb = b->upper.Evaluate(th);
        const bool same_j = ja == jb || std::abs(ja - jb) <= 1e-6 * std::max(1.0, std::abs(ja));
        diff += a->kappa_iter != b->kappa_iter || a->kappa_node != b->kappa_node || !same_j;
      }
      if (diff) {
        ok = false;
        out.Log(inst.name + ": " + std::to_string(diff) + " samples differ at n_max=" + std::to_string(n_max));
      }
    }
    ok ? ++t.ok : ++t.failed;
  }
  out.Log("milp nb=8: " + t.Str());
  out.details["instances"] = t.ToJson();
  out.pass = t.complete();
  return out;
}

}  // namespace
}  // namespace mpcert

int main(int argc, char** argv) {
  using namespace mpcert;
  CLI::App app{"acceptance criteria runner"};
  int criterion = 0;
  double budget_s = 300.0;
  double cap_s = 30.0;
  std::string json_out;
  app.add_option("criterion", criterion, "criterion number 1-10")->required()->check(CLI::Range(1, 10));
  app.add_option("--budget", budget_s, "wall-clock budget in seconds (0 = none)");
  app.add_option("--instance-cap", cap_s, "per-instance limit for multi-instance tiers (0 = none)");
  app.add_option("--json", json_out, "write a JSON summary here");
  CLI11_PARSE(app, argc, argv);

  if (const char* s = std::getenv("MPCERT_ACCEPT_SCALE")) {
    const double scale = std::atof(s);
    budget_s *= scale;
    cap_s *= scale;
  }
  static const char* kTitles[] = {"",
                                  "pointwise oracle equivalence",
                                  "node-sequence equality",
                                  "serial/parallel equivalence",
                                  "static refinement",
                                  "covering",
                                  "memory property",
                                  "speed-up direction",
                                  "scaling trend",
                                  "pendulum dimensions and self-consistency",
                                  "pause transparency"};
  using Fn = Outcome (*)(const Budget&, double);
  static const Fn kRun[] = {nullptr,    Criterion1, Criterion2, Criterion3, Criterion4, Criterion5,
                            Criterion6, Criterion7, Criterion8, Criterion9, Criterion10};
  std::cout << "CRITERION " << criterion << " (" << kTitles[criterion] << "), budget "
            << (budget_s > 0 ? std::to_string(static_cast<int>(budget_s)) + " s" : "unlimited")
            << std::endl;
  const Budget budget(budget_s);
  Outcome out;
  try {
    out = kRun[criterion](budget, cap_s);
  } catch (const std::exception& e) {
    out.Log(std::string("error: ") + e.what());
    out.pass = false;
  }
  std::cout << "CRITERION " << criterion << ": " << (out.pass ? "PASS" : "FAIL") << " ("
            << static_cast<int>(budget.Elapsed()) << " s)" << std::endl;
  if (!json_out.empty()) {
    Json j{{"criterion", criterion},
           {"title", kTitles[criterion]},
           {"pass", out.pass},
           {"budget_s", budget_s},
           {"elapsed_s", budget.Elapsed()},
           {"log", out.lines},
           {"details", out.details}};
    std::filesystem::create_directories(std::filesystem::path(json_out).parent_path());
    WriteJsonFile(json_out, j);
  }
  return out.pass ? 0 : 1;
}

// SPDX-License-Identifier: Apache-2.0

#include "mpcert/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "mpcert/geometry.hpp"

namespace mpcert {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

}  // namespace

// ---------------------------------------------------------------- pool

WorkerPool::WorkerPool(int workers) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  busy_.assign(workers, 0.0);
  threads_.reserve(workers);
  for (int i = 0; i < workers; ++i) threads_.emplace_back([this, i] { Loop(i); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  work_cv_.notify_all();
  for (std::thread& t : threads_) t.join();
}

void WorkerPool::Submit(std::function<void()> task) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (error_) return;  // aborting: drop new work
    queue_.push_back(std::move(task));
  }
  work_cv_.notify_one();
}

void WorkerPool::Wait() {
  std::unique_lock<std::mutex> lock(mu_);
  done_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
  if (error_) {
    std::exception_ptr e = std::exchange(error_, nullptr);
    std::rethrow_exception(e);
  }
}

int WorkerPool::idle() const {
  std::lock_guard<std::mutex> lock(mu_);
  return size() - running_;
}

std::vector<double> WorkerPool::BusySeconds() const {
  std::lock_guard<std::mutex> lock(mu_);
  return busy_;
}

void WorkerPool::Loop(int index) {
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    work_cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
    if (queue_.empty()) return;  // stop requested
    std::function<void()> task = std::move(queue_.front());
    queue_.pop_front();
    ++running_;
    lock.unlock();
    const Clock::time_point start = Clock::now();
    std::exception_ptr failure;
    try {
      task();
    } catch (...) {
      failure = std::current_exception();
    }
    const double spent = Seconds(start);
    lock.lock();
    busy_[index] += spent;
    if (failure && !error_) {
      error_ = failure;
      queue_.clear();
    }
    --running_;
    if (queue_.empty() && running_ == 0) done_cv_.notify_all();
  }
}

// ---------------------------------------------------------------- schedule

RatioSchedule::RatioSchedule(double base, std::map<int, double> levels)
    : base_(base), levels_(std::move(levels)) {
  auto check = [](double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("ratio r must lie in [0, 1]");
  };
  check(base_);
  for (const auto& [level, r] : levels_) check(r);
}

double RatioSchedule::At(int level) const {
  const auto it = levels_.find(level);
  return it == levels_.end() ? base_ : it->second;
}

// ---------------------------------------------------------------- dynamic

namespace {

struct DynShared {
  DynShared(const MpProblem& p, CertSettings s, RatioSchedule r, bool d, WorkerPool& w)
      : problem(p), settings(std::move(s)), schedule(std::move(r)), delayed(d), pool(w) {}

  const MpProblem& problem;
  CertSettings settings;
  RatioSchedule schedule;
  bool delayed;
  WorkerPool& pool;

  std::mutex mu;
  std::vector<RegionTuple> finals;  // completion order
  RunStats master;
  std::int64_t regions = 0, pushes = 0, pops = 0, distributed = 0, tasks = 0;
};

void RunDynTask(const std::shared_ptr<DynShared>& shared, RegionTuple seed,
                bool is_master) {
  WorkList worklist;
  worklist.Push(std::move(seed));
  std::vector<RegionTuple> finals;
  RunStats local;
  while (!worklist.empty()) {
    RegionTuple reg = worklist.Pop();
    ++local.pops;
    const int level = reg.kappa_node;
    const std::int64_t before = worklist.pushes();
    ProcessTuple(std::move(reg), worklist, finals, shared->problem, shared->settings,
                 shared->delayed);
    ++local.outer_iterations;
    local.max_round_pushes = std::max(local.max_round_pushes,
                                      static_cast<int>(worklist.pushes() - before));
    // Hand the ceil(r |S_d|) most recent tuples to new tasks.
    const double r = shared->schedule.At(level);
    const int count = static_cast<int>(std::ceil(r * worklist.size() - 1e-9));
    if (count > 0) {
      std::vector<RegionTuple> batch = worklist.PopTop(count);
      local.distributed += static_cast<std::int64_t>(batch.size());
      for (RegionTuple& t : batch) {
        auto task = std::make_shared<RegionTuple>(std::move(t));
        shared->pool.Submit([shared, task] { RunDynTask(shared, std::move(*task), false); });
      }
    }
    local.trace.push_back(worklist.size());
  }
  local.peak = worklist.peak();
  local.pushes = worklist.pushes();

  std::lock_guard<std::mutex> lock(shared->mu);
  shared->regions += static_cast<std::int64_t>(finals.size());
  for (RegionTuple& t : finals) shared->finals.push_back(std::move(t));
  shared->pushes += local.pushes;
  shared->pops += local.pops;
  shared->distributed += local.distributed;
  shared->tasks += 1;
  if (is_master) shared->master = std::move(local);
}

CertPartition RunDynamic(const MpProblem& problem, const RatioSchedule& schedule,
                         WorkerPool& pool, std::optional<int> n_max,
                         const CertSettings& settings, RunMetrics* metrics) {
  const Clock::time_point start = Clock::now();
  const std::vector<double> busy0 = pool.BusySeconds();
  CertSettings s = settings;
  if (n_max) {
    if (*n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    s.engine.n_max = *n_max;
  }
  auto shared = std::make_shared<DynShared>(problem, s, schedule, n_max.has_value(), pool);
  auto seed = std::make_shared<RegionTuple>(RegionTuple::Initial(problem));
  pool.Submit([shared, seed] { RunDynTask(shared, std::move(*seed), true); });
  pool.Wait();

  CertPartition partition;
  partition.regions = std::move(shared->finals);
  partition.provenance.algorithm = n_max ? "dyn-mod" : "dyn";
  partition.provenance.r = schedule.base();
  partition.provenance.n_max = n_max;
  partition.provenance.workers = pool.size();
  if (metrics) {
    RunMetrics m;
    m.algorithm = partition.provenance.algorithm;
    m.r = schedule.base();
    m.workers = pool.size();
    m.n_max = n_max;
    m.wall_s = Seconds(start);
    m.worker_busy_s = pool.BusySeconds();
    for (std::size_t i = 0; i < busy0.size(); ++i) m.worker_busy_s[i] -= busy0[i];
    m.outer_iterations = shared->master.outer_iterations;
    m.trace = std::move(shared->master.trace);
    m.peak = shared->master.peak;
    m.max_round_pushes = shared->master.max_round_pushes;
    m.regions = shared->regions;
    m.pushes = shared->pushes;
    m.pops = shared->pops;
    m.distributed = shared->distributed;
    m.tasks = shared->tasks;
    *metrics = std::move(m);
  }
  return partition;
}

}  // namespace

CertPartition BnbCertDyn(const MpProblem& problem, const RatioSchedule& schedule,
                         WorkerPool& pool, const CertSettings& settings,
                         RunMetrics* metrics) {
  return RunDynamic(problem, schedule, pool, std::nullopt, settings, metrics);
}

CertPartition BnbCertDynMod(const MpProblem& problem, const RatioSchedule& schedule,
                            WorkerPool& pool, int n_max, const CertSettings& settings,
                            RunMetrics* metrics) {
  return RunDynamic(problem, schedule, pool, n_max, settings, metrics);
}

// ---------------------------------------------------------------- static

int StaticPartCount(int theta_dim, int n) {
  if (theta_dim < 1 || n < 1) throw std::invalid_argument("StaticPartCount: bad dimensions");
  const int exponent = (n + 3) / 4 - 1;
  long long parts = 1;
  for (int k = 0; k < exponent; ++k) {
    parts *= theta_dim;
    if (parts > (1 << 20)) throw std::invalid_argument("StaticPartCount: too many parts");
  }
  return static_cast<int>(parts);
}

CertPartition BnbCertStatic(const MpProblem& problem, int n_p, WorkerPool& pool,
                            std::optional<int> n_max, const CertSettings& settings,
                            RunMetrics* metrics) {
  const Clock::time_point start = Clock::now();
  const std::vector<double> busy0 = pool.BusySeconds();
  const std::vector<Box> boxes = BoxPartition(problem.theta0, n_p);
  const int parts = static_cast<int>(boxes.size());
  std::vector<CertPartition> results(parts);
  std::vector<RunStats> stats(parts);
  for (int i = 0; i < parts; ++i) {
    pool.Submit([&, i] {
      RegionTuple reg0 = RegionTuple::Initial(problem, boxes[i]);
      results[i] = n_max ? BnbCertSerialMod(std::move(reg0), problem, *n_max, settings, &stats[i])
                         : BnbCertSerial(std::move(reg0), problem, settings, &stats[i]);
    });
  }
  pool.Wait();

  CertPartition partition;
  for (CertPartition& part : results) {
    for (RegionTuple& t : part.regions) partition.regions.push_back(std::move(t));
  }
  partition.provenance.algorithm = "static";
  partition.provenance.n_p = n_p;
  partition.provenance.n_max = n_max;
  partition.provenance.workers = pool.size();
  if (metrics) {
    RunMetrics m;
    m.algorithm = "static";
    m.workers = pool.size();
    m.n_max = n_max;
    m.wall_s = Seconds(start);
    m.worker_busy_s = pool.BusySeconds();
    for (std::size_t i = 0; i < busy0.size(); ++i) m.worker_busy_s[i] -= busy0[i];
    for (const RunStats& st : stats) {
      m.outer_iterations = std::max(m.outer_iterations, st.outer_iterations);
      m.peak = std::max(m.peak, st.peak);
      m.max_round_pushes = std::max(m.max_round_pushes, st.max_round_pushes);
      m.pushes += st.pushes;
      m.pops += st.pops;
    }
    m.regions = static_cast<std::int64_t>(partition.regions.size());
    m.tasks = parts;
    *metrics = std::move(m);
  }
  return partition;
}

// ---------------------------------------------------------------- dispatch

std::string ToString(Algorithm a) {
  switch (a) {
    case Algorithm::kSerial: return "serial";
    case Algorithm::kSerialMod: return "serial-mod";
    case Algorithm::kStatic: return "static";
    case Algorithm::kDyn: return "dyn";
    case Algorithm::kDynMod: return "dyn-mod";
  }
  return "?";
}

Algorithm ParseAlgorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::kSerial, Algorithm::kSerialMod, Algorithm::kStatic,
                      Algorithm::kDyn, Algorithm::kDynMod}) {
    if (ToString(a) == s) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

void RunConfig::Validate() const {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in [0, 1]");
  for (const auto& [level, value] : r_levels) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::invalid_argument("level ratio must lie in [0, 1]");
    }
  }
  if (n_p < 1) throw std::invalid_argument("n_p must be >= 1");
  if (n_max && *n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if ((algorithm == Algorithm::kSerialMod || algorithm == Algorithm::kDynMod) && !n_max) {
    throw std::invalid_argument(ToString(algorithm) + " requires n_max");
  }
}

CertPartition RunCertification(const MpProblem& problem, const RunConfig& config,
                               const CertSettings& settings, RunMetrics* metrics) {
  config.Validate();
  RunMetrics local;
  CertPartition partition;
  if (config.algorithm == Algorithm::kSerial || config.algorithm == Algorithm::kSerialMod) {
    const Clock::time_point start = Clock::now();
    RunStats st;
    partition = config.algorithm == Algorithm::kSerial
                    ? BnbCertSerial(RegionTuple::Initial(problem), problem, settings, &st)
                    : BnbCertSerialMod(RegionTuple::Initial(problem), problem,
                                       *config.n_max, settings, &st);
    local.algorithm = ToString(config.algorithm);
    local.n_max = config.algorithm == Algorithm::kSerialMod ? config.n_max : std::nullopt;
    local.wall_s = Seconds(start);
    local.worker_busy_s = {local.wall_s};
    local.outer_iterations = st.outer_iterations;
    local.trace = std::move(st.trace);
    local.peak = st.peak;
    local.max_round_pushes = st.max_round_pushes;
    local.regions = static_cast<std::int64_t>(partition.regions.size());
    local.pushes = st.pushes;
    local.pops = st.pops;
    local.tasks = 1;
  } else {
    WorkerPool pool(config.workers);
    const RatioSchedule schedule(config.r, config.r_levels);
    switch (config.algorithm) {
      case Algorithm::kStatic:
        partition = BnbCertStatic(problem, config.n_p, pool, config.n_max, settings, &local);
        break;
      case Algorithm::kDyn:
        partition = BnbCertDyn(problem, schedule, pool, settings, &local);
        break;
      default:
        partition = BnbCertDynMod(problem, schedule, pool, *config.n_max, settings, &local);
        break;
    }
    local.r = config.algorithm == Algorithm::kStatic ? 0.0 : config.r;
  }
  partition.provenance.seed = config.seed;
  partition.provenance.workers = config.workers;
  if (config.algorithm == Algorithm::kStatic) partition.provenance.n_p = config.n_p;
  local.workers = config.workers;
  if (metrics) *metrics = std::move(local);
  return partition;
}

// ---------------------------------------------------------------- bench

double Median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<SpeedupRow> SpeedupBench(const std::vector<MpProblem>& problems,
                                     const std::vector<Algorithm>& algorithms,
                                     const std::vector<int>& worker_counts,
                                     const RatioSchedule& schedule, int repetitions,
                                     const CertSettings* settings) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  auto timed = [&](const MpProblem& p, const RunConfig& cfg) {
    const CertSettings s = settings ? *settings : DefaultSettings(p);
    std::vector<double> times;
    for (int k = 0; k < repetitions; ++k) {
      RunMetrics m;
      RunCertification(p, cfg, s, &m);
      times.push_back(m.wall_s);
    }
    return Median(times);
  };

  std::vector<double> serial;
  for (const MpProblem& p : problems) serial.push_back(timed(p, RunConfig{}));

  std::vector<SpeedupRow> rows;
  for (Algorithm a : algorithms) {
    for (int workers : worker_counts) {
      RunConfig cfg;
      cfg.algorithm = a;
      cfg.workers = workers;
      cfg.r = schedule.base();
      cfg.r_levels = schedule.levels();
      cfg.n_p = workers;
      std::vector<double> par, ratio;
      for (std::size_t i = 0; i < problems.size(); ++i) {
        par.push_back(timed(problems[i], cfg));
        ratio.push_back(serial[i] / std::max(par.back(), 1e-12));
      }
      SpeedupRow row;
      row.algorithm = ToString(a);
      row.workers = workers;
      row.r = a == Algorithm::kStatic ? 0.0 : schedule.base();
      row.serial_s = Median(serial);
      row.parallel_s = Median(par);
      row.speedup = Median(ratio);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mpcert

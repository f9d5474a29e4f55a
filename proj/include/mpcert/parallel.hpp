// SPDX-License-Identifier: Apache-2.0
//
// Parallel certification on a shared-memory task pool: static box
// decomposition, dynamic redistribution of the worklist with ratio r, and
// the memory-bounded dynamic variant.

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/problem.hpp"

namespace mpcert {

/// Fixed set of threads draining one FIFO task queue. Tasks may submit
/// further tasks; Wait returns once the queue is empty and nothing runs.
/// The first exception thrown by a task is rethrown from Wait.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void Submit(std::function<void()> task);
  void Wait();

  int size() const { return static_cast<int>(threads_.size()); }
  int idle() const;
  /// Seconds each worker spent inside tasks since construction.
  std::vector<double> BusySeconds() const;

 private:
  void Loop(int index);

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  std::deque<std::function<void()>> queue_;
  int running_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
  std::vector<double> busy_;
  std::vector<std::thread> threads_;
};

/// Distribution ratio, optionally by level (number of nodes already explored
/// for the tuple just processed). Levels missing from the table use the base.
class RatioSchedule {
 public:
  explicit RatioSchedule(double base = 0.0, std::map<int, double> levels = {});
  double At(int level) const;
  double base() const { return base_; }
  const std::map<int, double>& levels() const { return levels_; }

 private:
  double base_;
  std::map<int, double> levels_;
};

struct RunMetrics {
  std::string algorithm;
  double r = 0.0;
  int workers = 1;
  std::optional<int> n_max;
  double wall_s = 0.0;
  std::vector<double> worker_busy_s;
  // Master loop (the task started on the initial tuple).
  int outer_iterations = 0;
  std::vector<int> trace;  // |S_d| after every outer iteration
  int peak = 0;
  int max_round_pushes = 0;
  // Totals over all tasks.
  std::int64_t regions = 0;
  std::int64_t pushes = 0;
  std::int64_t pops = 0;
  std::int64_t distributed = 0;
  std::int64_t tasks = 0;
  std::optional<double> speedup;

  /// Every pushed tuple was popped by its owner or handed to a new task.
  bool Conserved() const { return pushes == pops + distributed; }
};

/// Default number of static parts, n_theta^(ceil(n / 4) - 1).
int StaticPartCount(int theta_dim, int n);

/// Box decomposition of Theta0 into n_p parts certified independently
/// (serially per box, or memory-bounded when n_max is set). Results are
/// concatenated in box order.
CertPartition BnbCertStatic(const MpProblem& problem, int n_p, WorkerPool& pool,
                            std::optional<int> n_max, const CertSettings& settings,
                            RunMetrics* metrics = nullptr);

/// Dynamic decomposition. r = 0 reproduces BnbCertSerial, including the
/// order in which regions are finalized.
CertPartition BnbCertDyn(const MpProblem& problem, const RatioSchedule& schedule,
                         WorkerPool& pool, const CertSettings& settings,
                         RunMetrics* metrics = nullptr);

CertPartition BnbCertDynMod(const MpProblem& problem, const RatioSchedule& schedule,
                            WorkerPool& pool, int n_max, const CertSettings& settings,
                            RunMetrics* metrics = nullptr);

enum class Algorithm { kSerial, kSerialMod, kStatic, kDyn, kDynMod };
std::string ToString(Algorithm a);
Algorithm ParseAlgorithm(const std::string& s);

struct RunConfig {
  Algorithm algorithm = Algorithm::kSerial;
  double r = 0.0;
  std::map<int, double> r_levels;
  int n_p = 1;
  std::optional<int> n_max;
  int workers = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on out-of-range knobs.
  void Validate() const;
};

/// Runs one certification as configured and fills `metrics`.
CertPartition RunCertification(const MpProblem& problem, const RunConfig& config,
                               const CertSettings& settings, RunMetrics* metrics);

struct SpeedupRow {
  std::string algorithm;
  int workers = 1;
  double r = 0.0;
  double serial_s = 0.0;    // median serial time
  double parallel_s = 0.0;  // median parallel time
  double speedup = 0.0;     // median of per-problem serial/parallel ratios
};

/// Serial baseline first, then every (algorithm, P) with medians over
/// `repetitions` runs per problem. Static runs use n_p = P.
std::vector<SpeedupRow> SpeedupBench(const std::vector<MpProblem>& problems,
                                     const std::vector<Algorithm>& algorithms,
                                     const std::vector<int>& worker_counts,
                                     const RatioSchedule& schedule, int repetitions,
                                     const CertSettings* settings = nullptr);

double Median(std::vector<double> v);

}  // namespace mpcert

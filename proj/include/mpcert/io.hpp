// SPDX-License-Identifier: Apache-2.0
//
// File formats. Every double is written as a decimal string with 17
// significant digits ("inf" / "-inf" for infinities), so problems and
// partitions round-trip bit-exactly. Readers also accept plain JSON numbers.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/parallel.hpp"
#include "mpcert/problem.hpp"
#include "mpcert/relax_cert.hpp"

namespace mpcert {

using Json = nlohmann::json;

/// Thrown for malformed or inconsistent input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string EncodeDouble(double v);
double DecodeDouble(const Json& j);

// Problem: {kind, n_c, n_b, binary_set, c | H, f, f_theta, A, b, W,
// theta_lower, theta_upper}; matrices are lists of rows.
Json ProblemToJson(const MpProblem& problem);
MpProblem ProblemFromJson(const Json& j);

Json ValueFunctionToJson(const ValueFunction& v);
ValueFunction ValueFunctionFromJson(const Json& j, int dim);

Json RegionToJson(const Region& region);
Region RegionFromJson(const Json& j, int dim);

Json EngineStateToJson(const EngineState& state);
EngineState EngineStateFromJson(const Json& j, int dim);

/// Every field of the tuple, including engine state, so that paused work
/// can be checkpointed.
Json TupleToJson(const RegionTuple& tuple);
RegionTuple TupleFromJson(const Json& j, int dim);

Json PartitionToJson(const CertPartition& partition, const MpProblem& problem);
CertPartition PartitionFromJson(const Json& j, int dim);

Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);

MpProblem LoadProblem(const std::string& path);
void SaveProblem(const std::string& path, const MpProblem& problem);
CertPartition LoadPartition(const std::string& path, int dim);
void SavePartition(const std::string& path, const CertPartition& partition,
                   const MpProblem& problem);

/// Metrics CSV with columns algorithm, r, P, n_max, wall_s, peak_S,
/// outer_iters, regions, worst_kappa_iter, worst_kappa_node, seed.
std::string MetricsCsvHeader();
std::string MetricsCsvRow(const RunMetrics& metrics, const WorstCase& worst,
                          std::uint64_t seed);
/// Appends a row, writing the header first when the file is new or empty.
void AppendMetricsCsv(const std::string& path, const RunMetrics& metrics,
                      const WorstCase& worst, std::uint64_t seed);

struct MetricsRecord {
  std::string algorithm;
  double r = 0.0;
  int workers = 1;
  std::string n_max;  // empty when unset
  double wall_s = 0.0;
  int peak = 0;
  int outer_iterations = 0;
  long long regions = 0;
  int worst_kappa_iter = 0;
  int worst_kappa_node = 0;
  std::uint64_t seed = 0;
};
std::vector<MetricsRecord> ReadMetricsCsv(const std::string& path);

}  // namespace mpcert

// Copyright 2026 The entlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Configuration-driven finite-size scans (schema "entlab-config/1").

#ifndef ENTLAB_LAB_HPP
#define ENTLAB_LAB_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entlab/models.hpp"
#include "entlab/mps.hpp"
#include "entlab/spectra.hpp"

namespace entlab::lab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitError = 4;

enum class ExperimentKind { kEntropyScan, kGapScan, kFfCheck, kJwEquivalence, kMpsOracle, kReport };

const char* to_string(ExperimentKind kind);

struct Tolerances {
  double solver = 1e-9;
  double degeneracy = 1e-8;
  double kernel = 1e-8;
  double schmidt_rank = 1e-10;
};

struct Assertions {
  std::optional<bool> saturated;
  std::optional<bool> entropy_increasing;
  std::optional<double> max_entropy;
  std::optional<double> min_gap;
  /// gap(last length) < ratio * gap(first length)
  std::optional<double> gap_ratio_below;
  std::optional<double> max_discrepancy;
  bool empty() const {
    return !saturated && !entropy_increasing && !max_entropy && !min_gap &&
           !gap_ratio_below && !max_discrepancy;
  }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEntropyScan;
  std::string model_ref;
  std::optional<ModelSpec> model;
  std::string spec_ref;
  std::optional<MpsSpec> spec;
  std::vector<int> lengths;
  std::string cut = "middle";
  double epsilon = 0.01;
  Tolerances tol;
  std::uint64_t seed = 20260101;
  std::string output;
  int threads = 0;
  std::int64_t dimension_guard = kDefaultDimensionGuard;
  int samples = 0;
  std::vector<std::string> inputs;
  Assertions assertions;
  /// Canonical JSON of the parsed file (sorted keys) and its FNV-1a hash.
  std::string canonical;
  std::string hash;
};

/// "a..b", "a..b:step" or a comma separated list; result strictly ascending.
std::vector<int> parse_lengths(const std::string& text);

/// `base_dir` resolves relative model/spec/input paths.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);

struct CutRecord {
  int cut = 0;
  double entropy = 0.0;
  int schmidt_rank = 0;
  int trunc_k = 0;
  double bound_k = 0.0;
  double distance_sq = 0.0;
  double three_epsilon = 0.0;
  bool truncation_bounds_hold = true;
  std::vector<double> weights;
};

struct LengthRecord {
  int length = 0;
  std::string status = "ok";
  std::string error;
  double tolerance = 0.0;
  double wall_seconds = 0.0;
  double ground_energy = 0.0;
  double gap = 0.0;
  int ground_multiplicity = 0;
  std::vector<CutRecord> cuts;
  /// Experiment-specific scalars, emitted as extra CSV columns.
  std::map<std::string, double> values;
  bool ok() const { return status == "ok"; }
};

struct ScanResult {
  ExperimentKind kind = ExperimentKind::kEntropyScan;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<LengthRecord> records;
  /// gap ~ a + b / L over successful records (gap scans).
  std::optional<std::pair<double, double>> gap_fit;
  double wall_seconds = 0.0;
  int failed() const;
  int exit_code() const { return failed() > 0 ? kExitPartial : kExitOk; }
};

/// Ground multiplet data for one length, shared between scans.
struct LengthSolve {
  double ground_energy = 0.0;
  double gap = 0.0;
  int multiplicity = 1;
  /// Canonical member of the ground multiplet: the eigenvector of total S_z
  /// restricted to the multiplet with the largest eigenvalue.
  PureStateVector ground;
};

class SolveCache {
 public:
  std::shared_ptr<const LengthSolve> get(const ModelSpec& model, int length,
                                         const Tolerances& tol, std::uint64_t seed,
                                         std::int64_t dimension_guard);
  std::size_t size() const;
  int misses() const { return misses_; }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const LengthSolve>> entries_;
  int misses_ = 0;
};

LengthSolve solve_length(const ModelSpec& model, int length, const Tolerances& tol,
                         std::uint64_t seed, std::int64_t dimension_guard);

/// Worker count: config threads (0 = all), capped by ENTLAB_THREADS.
int worker_count(int requested, std::size_t jobs);

ScanResult run_entropy_scan(const ExperimentConfig& config, SolveCache* cache = nullptr);
ScanResult run_gap_scan(const ExperimentConfig& config, SolveCache* cache = nullptr);
ScanResult run_ff_check(const ExperimentConfig& config);
ScanResult run_jw_equivalence(const ExperimentConfig& config);
ScanResult run_mps_oracle(const ExperimentConfig& config);
ScanResult run_experiment(const ExperimentConfig& config, SolveCache* cache = nullptr);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

Table to_table(const ScanResult& result, const ExperimentConfig& config);
void write_csv(const Table& table, const std::string& path);
Table read_csv(const std::string& path);
std::string sidecar_json(const ScanResult& result, const ExperimentConfig& config);
/// Writes <output> (CSV) and <output>.json; no-op for an empty output.
void write_outputs(const ScanResult& result, const ExperimentConfig& config);

struct ReportResult {
  Table table;
  std::vector<std::string> summary;
  std::vector<std::string> warnings;
  int assertion_failures = 0;
  int exit_code() const { return assertion_failures > 0 ? kExitAssertion : kExitOk; }
};

/// Merges scan CSVs into one row per (experiment, length, cut), then
/// evaluates the assertions. Throws io listing any missing inputs.
ReportResult run_report(const std::vector<std::string>& inputs,
                        const Assertions& assertions = {});

/// Executes a config end to end (including report) and returns the exit code.
int run_config(const ExperimentConfig& config, SolveCache* cache = nullptr);

}  // namespace entlab::lab

#endif  // ENTLAB_LAB_HPP

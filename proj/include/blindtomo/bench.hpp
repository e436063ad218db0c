// Copyright 2026 The blindtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Experiment harness: configuration, seeded trial orchestration over an m
// sweep, aggregation and CSV / JSON output.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "blindtomo/diagnostics.hpp"
#include "blindtomo/measurements.hpp"
#include "blindtomo/recovery.hpp"
#include "blindtomo/signals.hpp"

namespace blindtomo {

/// Bad configuration. path() names the offending field, e.g. "instance.s".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class EmptySummaryError : public std::invalid_argument {
 public:
  explicit EmptySummaryError(const std::string& what) : std::invalid_argument(what) {}
};

class OutputError : public std::runtime_error {
 public:
  explicit OutputError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentKind { kGuePhase, kPauliBlind, kCoherentAls, kRipProbe, kUnitOracles };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Solver names accepted in ExperimentConfig::solvers.
const std::vector<std::string>& known_solvers();

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kGuePhase;
  InstanceSpec instance;
  EnsembleKind ensemble = EnsembleKind::kGue;
  std::vector<Eigen::Index> m_values;
  int trials_per_m = 1;
  NoiseModel noise;
  /// s and r are taken from `instance`.
  SdtConfig sdt;
  AlsConfig als;
  std::vector<std::string> solvers;
  double success_threshold = 1e-3;
  std::uint64_t master_seed = 0;
  std::string output;
  int workers = 1;
  /// Record wall-clock time per row. Off by default so output bytes depend
  /// only on the configuration.
  bool timing = false;
  /// rip-probe: signals sampled per ensemble, and the delta counted as success.
  int rip_samples = 100;
  double rip_delta = 0.5;

  /// Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  /// Strict: unknown keys and wrongly typed values throw ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Default configuration for each experiment.
ExperimentConfig preset(ExperimentKind kind);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
/// possible and taken as a string otherwise. Intermediate objects are created.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Recursively merges `patch` into `base` (objects merge, everything else replaces).
void merge_json(nlohmann::json& base, const nlohmann::json& patch);

/// One problem instance of a sweep. Seeds: the instance uses
/// derive_seed(master, {m, trial}); solver randomness uses
/// derive_seed(master, {m, trial, solver_tag(name)}).
struct TrialInstance {
  std::uint64_t seed = 0;
  CalibrationVector xi;
  DensityMatrix rho;
  BlockSignal x;
  MeasurementEnsemble ensemble;
  RealVector y;
};

TrialInstance make_instance(const ExperimentConfig& cfg, Eigen::Index m, int trial);

/// Stable 64-bit tag of a solver name (FNV-1a).
std::uint64_t solver_tag(const std::string& name);

struct ResultRow {
  std::string experiment;
  Eigen::Index m = 0;
  int trial = 0;
  std::string solver;
  TrialMetrics metrics;
  double wall_ms = 0.0;
};

/// Runs one solver on one instance and scores it.
ResultRow run_solver(const ExperimentConfig& cfg, const TrialInstance& inst, Eigen::Index m, int trial,
                     const std::string& solver);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Every (m, trial, solver) row, sorted by (m, trial, solver). The result does
/// not depend on cfg.workers.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

struct SummaryRow {
  std::string solver;
  Eigen::Index m = 0;
  int trials = 0;
  double recovery_rate = 0.0;
  double median_frob_error = 0.0;
  double median_trace_norm_error = 0.0;
  double median_calib_l2_error = 0.0;
};

/// Median of the non-NaN entries; NaN if there are none.
double median(std::vector<double> values);

/// Per (solver, m): fraction of rows with frob_error < threshold and medians
/// of the error columns. Throws EmptySummaryError on empty input.
std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows, double threshold = 1e-3);

/// First m at which the solver's rate reaches 0.5, linearly interpolated
/// between adjacent sweep points; nullopt if it never does.
std::optional<double> interpolated_m50(const std::vector<SummaryRow>& summary, const std::string& solver);

inline constexpr const char* kResultsCsvHeader =
    "experiment,m,trial,solver,frob_error,trace_norm_error,calib_l2_error,success,iterations,termination,"
    "wall_ms";
inline constexpr const char* kResultsSchema = "blindtomo.results/1";
inline constexpr const char* kSummaryCsvHeader =
    "solver,m,trials,recovery_rate,median_frob_error,median_trace_norm_error,median_calib_l2_error";

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& summary, std::ostream& out);

/// Resolved config, version stamp, summary and m50 per solver.
nlohmann::json sidecar_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& summary);

/// Writes <output>, <output>.summary.csv and <output>.json. Throws OutputError.
void write_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

std::string version_string();
std::string git_hash();

}  // namespace blindtomo

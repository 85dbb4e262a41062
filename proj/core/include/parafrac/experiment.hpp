#pragma once

// Batch driver: runs replicas of a configured experiment, streams CSV rows in
// replica order and attaches a closed-form oracle when one applies.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parafrac/config.hpp"
#include "parafrac/csv.hpp"
#include "parafrac/dim_formulas.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/parabolic_cover.hpp"

namespace parafrac {

struct ReplicaResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double value = 0.0;
  double std_error = 0.0;
  std::string detail;  // window, or the error message of a failed replica
};

struct RunRecord {
  std::string config_hash;
  ExperimentKind kind = ExperimentKind::graph_dim;
  std::vector<ReplicaResult> replicas;
  std::size_t n_ok = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::optional<FormulaResult> oracle;
  double tolerance = 0.0;
  std::optional<bool> pass;  // unset when there is nothing to compare against
  bool runtime_failure = false;  // fewer than 80% of replicas succeeded

  std::vector<ScalingLedger> ledgers;      // counting kinds, one per successful replica
  std::vector<EnergyReport> energy;        // energy_threshold
  std::map<std::string, CsvTable> tables;  // file stem -> table
};

/// Closed-form value the experiment is compared against, if any.
std::optional<FormulaResult> experiment_oracle(const ExperimentConfig& config);

/// Tolerance used when the config does not set one.
double default_tolerance(ExperimentKind kind);

/// Validates the config, runs it and, when `write_files` is set, writes one
/// CSV per table into config.out_dir (created if missing). Output bytes depend
/// only on the config and seed, not on the thread count.
RunRecord run_experiment(const ExperimentConfig& config, bool write_files = true);

/// Exit status for a finished run: 0 pass or no verdict, 1 tolerance failure,
/// 3 runtime failure.
int exit_code(const RunRecord& record);

}  // namespace parafrac

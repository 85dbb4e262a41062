#pragma once

// Experiment configuration: INI-style `[section]` headers with `key = value`
// lines. '#' and ';' start comments. Unknown sections or keys are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/parabolic_cover.hpp"
#include "parafrac/stable_sim.hpp"

namespace parafrac {

enum class ExperimentKind {
  graph_dim,
  range_dim,
  parabolic_dim,
  kernel_sweep,
  energy_threshold,
  formula_table,
  hitcount,
};

std::string_view to_string(ExperimentKind k) noexcept;

struct TimeSetSpec {
  TimeSetKind kind = TimeSetKind::interval;
  int level = 12;
  double ratio = 1.0 / 3.0;
  double t_max = 1.0;
};

struct DriftConfig {
  DriftKind kind = DriftKind::zero;  // sampled_path is not configurable
  std::vector<double> constant;
  double beta = 0.5;
  double base = 2.0;
};

struct KernelSweepSpec {
  bool kappa = false;
  bool in_tau = true;
  double beta = 0.5;
  std::vector<int> scales{2, 3, 4, 5, 6, 7, 8, 9, 10};  // sweep values 2^-j
  double tau = 1.0 / 16384.0;  // fixed |tau| for delta sweeps
  double delta_norm = 0.0;     // fixed ||delta|| for tau sweeps, along e_1
  std::size_t n_mc = 100000;
};

struct EnergySpec {
  EnergyKernel kernel = EnergyKernel::euclidean_beta;
  bool graph_measure = true;  // false: frostman candidate on the time set
  std::vector<double> betas;
  std::vector<int> levels;
  double resolution = 0.05;
  std::size_t kernel_mc = 256;
};

struct FormulaSpec {
  std::optional<double> phi_alpha;
  std::optional<double> holder_beta;
  std::optional<double> hurst;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::graph_dim;
  StableParams process;
  TimeSetSpec time_set;
  DriftConfig drift;
  std::vector<int> levels;  // empty selects the default rule for the kind
  GaugeConvention convention = GaugeConvention::diam_gauge;
  KernelSweepSpec kernel;
  EnergySpec energy;
  FormulaSpec formula;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<double> tolerance;
  std::string out_dir = ".";

  /// Deterministic INI rendering of every field; parse(canonical()) round-trips.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
  /// Throws ValidationError naming the first violated precondition.
  void validate() const;

  TimeSet build_time_set() const;
  DriftSpec build_drift() const;
  /// Levels used for counting: explicit levels or the kind's default rule.
  std::vector<int> effective_levels() const;
};

/// Parses config text. Throws ValidationError on syntax errors, unknown keys
/// or malformed values. Does not call validate().
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Decimal or 0x-prefixed hexadecimal 64-bit unsigned integer.
std::uint64_t parse_seed(std::string_view text);

/// "2..12" or "2, 3, 5".
std::vector<int> parse_levels(std::string_view text);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace parafrac

#pragma once

// Occupancy counts of alpha-parabolic cylinder lattices and the box-counting
// dimension estimates derived from them.
//
// Level k uses cells of time side 2^-k and space side 2^(-k/alpha), anchored at
// the origin. Cells are half-open, so every point lies in exactly one cell.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/stable_sim.hpp"

namespace parafrac {

/// Row-major point cloud. Graph clouds carry time in column 0; range clouds
/// have space columns only.
struct PointCloud {
  std::size_t dim = 0;
  bool has_time = true;
  std::vector<double> data;

  std::size_t size() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Lattice coordinate of `point` at level k. The first coordinate is treated as
/// time (side 2^-k), the rest as space (side 2^(-k/alpha)).
std::vector<std::int64_t> cell_index(double alpha, int k, std::span<const double> point);

enum class GaugeConvention { time_gauge, diam_gauge };

std::string_view to_string(GaugeConvention c) noexcept;

struct ScalingLedger {
  double alpha = 1.0;
  std::vector<int> levels;
  std::vector<std::uint64_t> counts;  // N_k, aligned with levels
  std::size_t n_points = 0;
  std::size_t dim = 0;
  bool has_time = true;

  double time_side(std::size_t i) const;
  double space_side(std::size_t i) const;
};

/// Distinct occupied cells per level. Range clouds (no time column) are counted
/// in cubes and require alpha == 1. The result does not depend on `threads`.
ScalingLedger occupancy(const PointCloud& cloud, double alpha, std::span<const int> levels,
                        unsigned threads = 1);

struct DimEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<int> window;
  GaugeConvention convention = GaugeConvention::diam_gauge;
};

struct EstimateOptions {
  int trim_coarse = 2;
  int trim_fine = 2;
  std::size_t min_levels = 4;
};

/// Slope of log N_k against the log inverse cell size, after trimming the
/// coarsest and finest levels. Both gauges regress log2 N_k on k once and scale
/// by (alpha v 1), so they agree exactly.
DimEstimate estimate_dimension(const ScalingLedger& ledger,
                               GaugeConvention convention = GaugeConvention::diam_gauge,
                               const EstimateOptions& options = {});

/// Number of distinct space cells of side 2^(-k/alpha) visited inside each
/// nonempty time window [j 2^-k, (j+1) 2^-k). Requires max grid gap <= 2^-k / 4.
std::vector<std::uint32_t> hit_count_statistic(const PathSample& path, int k);

struct HitCountFit {
  std::vector<int> levels;
  std::vector<double> means;
  double delta = 0.0;  // slope of log2 mean M_k against k
};

HitCountFit hit_count_fit(const PathSample& path, std::span<const int> levels);

/// {(t, X_t + f(t))}. Time is divided by t_max when the horizon exceeds 1.
PointCloud graph_cloud(const PathSample& path, const DriftSpec& drift);

/// {X_t + f(t)}.
PointCloud range_cloud(const PathSample& path, const DriftSpec& drift);

/// Levels 2 .. floor(log2(n) / 2) + 2 for Euclidean graph counts of n points.
std::vector<int> default_euclidean_graph_levels(std::size_t n_points);

/// Levels 2 .. k_max with 2^-k_max >= 4 * max_gap.
std::vector<int> default_parabolic_levels(double max_gap);

/// Cube levels 2 .. k_max for a range cloud of an alpha-stable path, with
/// 2^(-k_max alpha) >= 4 * max_gap.
std::vector<int> default_range_levels(double max_gap, double alpha);

}  // namespace parafrac

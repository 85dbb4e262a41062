#pragma once

// Sample paths of isotropic alpha-stable Levy processes in R^d.
//
// The process is normalised so that E exp(i<xi, X_t>) = exp(-t |xi|^alpha).
// Increments are drawn by Gaussian subordination: X_dt = sqrt(2 S) Z with Z a
// standard normal vector and S a positive (alpha/2)-stable variable with
// E exp(-lambda S) = exp(-dt lambda^(alpha/2)). At alpha = 2, S == dt.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "parafrac/rng.hpp"

namespace parafrac {

struct StableParams {
  double alpha = 2.0;    // stability index in (0, 2]
  int d = 1;             // spatial dimension
  double scale_c = 1.0;  // constant of the Levy exponent; fixed to 1

  /// Throws ParameterError unless 0 < alpha <= 2, d >= 1 and scale_c == 1.
  void validate() const;
};

/// Strictly increasing sampling times starting at 0 and bounded by a horizon.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> points, double t_max);

  /// n_intervals + 1 equispaced points on [0, t_max].
  static TimeGrid uniform(std::size_t n_intervals, double t_max = 1.0);

  const std::vector<double>& points() const noexcept { return points_; }
  double t_max() const noexcept { return t_max_; }
  std::size_t size() const noexcept { return points_.size(); }
  double max_gap() const noexcept;
  double min_gap() const noexcept;

 private:
  std::vector<double> points_;
  double t_max_;
};

/// A sampled path. positions is row-major with one R^d row per grid point.
struct PathSample {
  StableParams params;
  TimeGrid grid;
  std::vector<double> positions;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return grid.size(); }
  std::span<const double> position(std::size_t i) const {
    return {positions.data() + i * static_cast<std::size_t>(params.d),
            static_cast<std::size_t>(params.d)};
  }
};

/// One draw S > 0 with E exp(-lambda S) = exp(-lambda^beta), beta in (0, 1).
/// Kanter's integral representation: one uniform angle and one exponential.
double sample_positive_stable(double beta, Stream& rng);

/// Writes one draw of X_dt into `out` (size params.d).
void sample_stable_increment(const StableParams& params, double dt, Stream& rng,
                             std::span<double> out);

std::vector<double> sample_stable_increment(const StableParams& params, double dt, Stream& rng);

/// n independent draws of X_dt, row-major (n x d). Draw i uses Stream(seed, i).
std::vector<double> sample_increments(const StableParams& params, double dt, std::size_t n,
                                      std::uint64_t seed);

/// Cumulative sums of independent increments over the grid gaps.
/// The increment ending at grid index i is drawn from Stream(seed, i), so the
/// result is bit-identical for any `threads` value.
PathSample simulate_path(const StableParams& params, const TimeGrid& grid, std::uint64_t seed,
                         unsigned threads = 1);

struct IsotropyReport {
  double statistic = 0.0;  // largest chi-square over the coordinate planes tested
  double p_value = 1.0;    // Bonferroni-adjusted smallest p-value
  double threshold = 0.01;
  bool pass = true;
};

/// Chi-square test of uniformity of the planar angle atan2(x_{j+1}, x_j) over
/// consecutive coordinate planes. Any isotropic law makes every such angle
/// uniform on (-pi, pi]. Needs d >= 2 and at least 10^4 samples.
IsotropyReport isotropy_check(std::span<const double> samples, int d, double threshold = 0.01);

}  // namespace parafrac

#pragma once

// Time sets with known Hausdorff dimension and a closed catalog of drifts.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "parafrac/stable_sim.hpp"

namespace parafrac {

enum class TimeSetKind { interval, cantor };

/// Finite level-n approximation of a time set T in [0, t_max].
struct TimeSet {
  TimeSetKind kind = TimeSetKind::interval;
  int level = 0;
  double ratio = 0.5;  // contraction ratio; cantor only
  double t_max = 1.0;
  std::vector<double> points;
  std::optional<double> known_dim;

  /// Length of one level-n interval: t_max * 2^-n (interval) or t_max * r^n (cantor).
  double resolution() const;

  /// The points as a sampling grid for simulate_path.
  TimeGrid grid() const { return TimeGrid(points, t_max); }
};

/// interval: 2^level + 1 equispaced points including both endpoints.
/// cantor: the 2^level left endpoints of the surviving intervals.
/// Throws ParameterError for level < 0, level > 30, t_max <= 0 or a cantor ratio
/// outside (0, 1/2].
TimeSet build_time_set(TimeSetKind kind, int level, double ratio = 1.0 / 3.0, double t_max = 1.0);

enum class DriftKind { zero, constant, power, weierstrass, sampled_path };

/// A deterministic drift f: [0, t_max] -> R^d.
///
/// power and weierstrass act identically on every coordinate.
struct DriftSpec {
  DriftKind kind = DriftKind::zero;
  int d = 1;
  double t_max = 1.0;
  std::vector<double> constant;  // constant
  double beta = 1.0;             // exponent: power, weierstrass
  double base = 2.0;             // weierstrass base a > 1
  int terms = 0;                 // weierstrass truncation K
  std::shared_ptr<const PathSample> path;  // sampled_path
  std::optional<double> holder_beta;

  static DriftSpec zero(int d, double t_max = 1.0);
  static DriftSpec constant_vector(std::vector<double> c, double t_max = 1.0);
  /// t -> t^beta on [0, 1].
  static DriftSpec power(double beta, int d);
  /// W(t) = sum_{k<K} a^{-k beta} cos(a^k t) with the smallest K such that a^{-K beta} < 1e-12.
  static DriftSpec weierstrass(double base, double beta, int d, double t_max = 1.0);
  /// Left-constant extension of a frozen path between its grid points.
  static DriftSpec sampled_path(PathSample sample);
};

/// Writes f(t) into out (size f.d). Throws ParameterError for t outside [0, t_max].
void eval_drift(const DriftSpec& f, double t, std::span<double> out);
std::vector<double> eval_drift(const DriftSpec& f, double t);

struct HolderCertificate {
  double constant = 0.0;          // max ratio over n_pairs pairs
  double refined_constant = 0.0;  // max ratio over 10 * n_pairs pairs
  bool pass = false;
};

/// Empirical Holder constant of f at exponent beta over uniform random pairs
/// in [0, t_max]^2. The first n_pairs pairs of the refined run are the coarse
/// pairs. The stability test (both constants finite, refined at most 10% above
/// coarse) is applied on the exponent grid 0.01, 0.02, ... up to the first
/// grid value >= beta, and the certificate passes iff it holds at every one of
/// them. This makes pass/fail monotone in beta.
HolderCertificate holder_certificate(const DriftSpec& f, double beta, std::size_t n_pairs,
                                     std::uint64_t seed = 0x5eedULL);

/// Translates rows (n x d) so the bounding box is centred at the origin, then
/// projects every row onto the closed ball of radius 1/2. Returns the number
/// of rows that were shortened.
std::size_t clip_to_half_ball(std::span<double> rows, int d);

}  // namespace parafrac

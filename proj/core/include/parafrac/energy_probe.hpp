#pragma once

// Monte Carlo difference kernels, discrete Riesz-type energies and a
// finiteness detector used as a capacity dimension probe.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/stable_sim.hpp"

namespace parafrac {

struct KernelQuery {
  double alpha = 2.0;
  int d = 1;
  double beta = 0.0;
  double tau = 1.0;            // 0 < |tau| <= 1
  std::vector<double> delta;   // size d, norm <= 1
  std::size_t n_mc = 100000;   // >= 1000

  void validate() const;
};

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double clip_rate = 0.0;  // fraction of samples with norm below the clip floor
  bool valid = true;       // clip_rate < 1e-4
};

/// Norms below this floor are raised to it before taking negative powers.
inline constexpr double kKernelClipFloor = 1e-9;
inline constexpr double kMaxClipRate = 1e-4;

/// Common random numbers for kernel sweeps: n draws Y of X_1, reused for every
/// (beta, tau, delta) through X_|tau| = |tau|^(1/alpha) Y.
class KernelSampler {
 public:
  KernelSampler(const StableParams& params, std::size_t n_mc, std::uint64_t seed,
                unsigned threads = 1);

  const StableParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return n_; }

  /// E ||(tau, sign(tau) X_|tau| + delta)||^-beta.
  KernelEstimate kernel_K(double beta, double tau, std::span<const double> delta) const;
  /// E ||sign(tau) X_|tau| + delta||^-beta; requires beta < d.
  KernelEstimate kernel_kappa(double beta, double tau, std::span<const double> delta) const;

 private:
  KernelEstimate reduce(double beta, double tau, std::span<const double> delta,
                        bool with_time) const;

  StableParams params_;
  std::size_t n_;
  std::vector<double> samples_;  // n x d
};

KernelEstimate kernel_K(const KernelQuery& query, std::uint64_t seed);
KernelEstimate kernel_kappa(const KernelQuery& query, std::uint64_t seed);

/// Exponent e of the sharpest applicable power envelope |tau|^e (in_tau) or
/// ||delta||^e of the K or kappa kernel. The delta envelopes hold for
/// |tau| <= ||delta||^(alpha v 1). Throws NotApplicableError for K in delta
/// with beta > d, where no fixed-tau envelope is available.
double envelope_exponent(bool kappa, bool in_tau, double alpha, int d, double beta);

/// Discrete measure on points (t_i, x_i) in R^(1+d).
struct DiscreteMeasure {
  int d = 1;
  std::vector<double> times;
  std::vector<double> space;  // n x d
  std::vector<double> weights;

  std::size_t size() const noexcept { return times.size(); }
};

/// Uniform probability on {(t, f(t))} over the time set points. With
/// clip_half_ball the drift values are centred and projected into the ball of
/// radius 1/2.
DiscreteMeasure frostman_candidate(const TimeSet& time_set, const DriftSpec& drift,
                                   bool clip_half_ball = false);

/// Uniform probability on the sampled graph {(t, X_t + f(t))}.
DiscreteMeasure graph_measure(const PathSample& path, const DriftSpec& drift);

enum class EnergyKernel { euclidean_beta, K_beta, kappa_beta };
enum class Verdict { converging, diverging, inconclusive };

std::string_view to_string(EnergyKernel k) noexcept;
std::string_view to_string(Verdict v) noexcept;

struct EnergyOptions {
  std::vector<int> levels;       // mesh levels; empty selects defaults
  double alpha = 2.0;            // process index for K_beta / kappa_beta
  std::size_t kernel_mc = 256;   // shared draws for K_beta / kappa_beta
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double converging_ratio = 1.1;
  double diverging_ratio = 2.0;
};

struct EnergyReport {
  double beta = 0.0;
  std::vector<int> levels;
  std::vector<double> partial_sums;  // pairs with time lag >= 2^-level
  double total = 0.0;                // all off-diagonal pairs
  double growth_ratio = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

/// Default mesh: three levels six octaves apart ending at floor(log2 n).
std::vector<int> default_energy_levels(std::size_t n_atoms);

/// Verdict from the growth ratio of the last two partial-sum increments.
Verdict energy_verdict(std::span<const double> partial_sums, double converging_ratio,
                       double diverging_ratio, double* growth_ratio = nullptr);

/// Discrete energy sum_{i != j} mu_i mu_j k(p_i - p_j) with partial sums over
/// pairs whose time lag is at least 2^-level. Results do not depend on `threads`.
EnergyReport energy_integral(const DiscreteMeasure& mu, EnergyKernel kernel, double beta,
                             const EnergyOptions& options = {});

/// Reports for several beta values from one pass over the pairs.
std::vector<EnergyReport> energy_sweep(const DiscreteMeasure& mu, EnergyKernel kernel,
                                       std::span<const double> betas,
                                       const EnergyOptions& options = {});

struct ThresholdResult {
  std::optional<double> beta_star;
  std::vector<double> grid;
  std::vector<Verdict> grid_verdicts;
  std::vector<std::pair<double, Verdict>> bisection;
  std::vector<EnergyReport> reports;  // family-averaged, grid order then bisection order
  std::string message;
};

/// Largest beta whose family-averaged energy converges, refined by bisection
/// to `resolution`. An all-converging or all-diverging grid yields no estimate.
ThresholdResult capacity_threshold(std::span<const DiscreteMeasure> family, EnergyKernel kernel,
                                   std::span<const double> beta_grid,
                                   const EnergyOptions& options = {}, double resolution = 0.05);

}  // namespace parafrac

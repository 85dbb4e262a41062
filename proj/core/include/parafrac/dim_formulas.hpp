#pragma once

// Closed-form dimension values and bounds for stable processes with drift.
//
// Every piecewise formula is expressed as a list of branches, each with the
// predicate that selects it and its value. Evaluation picks the fired branch;
// on a branch boundary several fire and their values must agree.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parafrac {

struct FormulaInputs {
  double alpha = 2.0;
  int d = 1;
  double dim_t = 1.0;
  std::optional<double> phi_alpha;
  std::optional<double> holder_beta;
};

struct FormulaResult {
  double lo = 0.0;
  double hi = 0.0;
  std::string theorem_tag;
  std::string branch;
  FormulaInputs inputs;

  bool is_value() const noexcept { return lo == hi; }
  double value() const noexcept { return lo; }
};

struct Branch {
  std::string_view name;
  bool fires = false;
  double value = 0.0;
};

/// Branch tables. Each throws the same errors as the matching evaluator.
std::vector<Branch> graph_dim_branches(const FormulaInputs& in);
std::vector<Branch> range_dim_branches(const FormulaInputs& in);
std::vector<Branch> apriori_upper_branches(double alpha, int d, double phi);
std::vector<Branch> apriori_lower_branches(double alpha, int d, double phi);
std::vector<Branch> improvement_branches(double alpha, int d, double phi);
std::vector<Branch> graph_phi_branches(double alpha, double dim_t);
std::vector<Branch> process_range_branches(double alpha, int d, double dim_t);
std::vector<Branch> holder_phi_branches(double alpha, int d, double dim_t, double beta);
std::vector<Branch> brownian_graph_branches(int d, double dim_t, double beta);
std::vector<Branch> brownian_range_branches(int d, double dim_t, double beta);

/// Graph dimension of X + f. For alpha <= 1 phi_alpha is read as phi_1.
FormulaResult graph_dim_with_drift(const FormulaInputs& in);
/// Range dimension of X + f.
FormulaResult range_dim_with_drift(const FormulaInputs& in);
/// Interval [lower, upper] for the Euclidean dimension of a set with
/// alpha-parabolic dimension phi. The lower end is clipped at 0.
FormulaResult apriori_bounds(double alpha, int d, double phi_alpha);
/// The same bounds solved for phi given a Euclidean dimension `dim`:
/// every phi consistent with dim lies in the returned interval.
FormulaResult apriori_reverse_bounds(double alpha, int d, double dim);
/// Lower bound on phi_1 from phi_alpha, alpha <= 1.
FormulaResult improvement_bound(double alpha, int d, double phi_alpha);
/// (alpha v 1) dim T for a constant drift.
FormulaResult constant_drift_phi(double alpha, double dim_t);
/// (alpha v 1) dim T for the graph of the process itself.
FormulaResult process_graph_phi(double alpha, double dim_t);
/// (alpha dim T) ^ d.
FormulaResult process_range_dim(double alpha, int d, double dim_t);
/// Upper bound on phi_alpha for a beta-Holder drift.
FormulaResult holder_phi_upper(double alpha, int d, double dim_t, double holder_beta);

struct BrownianBounds {
  FormulaResult graph;
  FormulaResult range;
};

/// Upper bounds on graph and range dimension of Brownian motion plus a
/// beta-Holder drift.
BrownianBounds brownian_holder_bounds(int d, double dim_t, double holder_beta);
/// dim T / H for fractional Brownian motion of Hurst index H.
FormulaResult fbm_graph_phi(double hurst, double dim_t);

struct SelfCheckReport {
  std::size_t points = 0;           // branch tables evaluated
  std::size_t generic_points = 0;   // of which off every boundary
  std::size_t multi_fire = 0;       // boundary points firing more than one branch
  std::size_t failures = 0;         // no branch, or several off-boundary, or disagreement
  double max_disagreement = 0.0;
  std::vector<std::string> messages;  // first few failures

  bool ok() const noexcept { return failures == 0; }
};

/// Sweeps a lattice of (alpha, beta, d, dim T, phi) containing every branch
/// boundary plus a generic lattice off all boundaries. On generic points
/// exactly one branch must fire; on boundary points all fired branches must
/// agree to `tolerance`.
SelfCheckReport formula_self_check(double tolerance = 1e-12);

}  // namespace parafrac

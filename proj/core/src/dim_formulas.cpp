#include "parafrac/dim_formulas.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "parafrac/errors.hpp"
#include "parafrac/rng.hpp"

namespace parafrac {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (0, 2]");
}

void check_d(int d) {
  if (d < 1) throw ParameterError("d must be >= 1");
}

void check_dim_t(double dim_t) {
  if (!(dim_t >= 0.0 && dim_t <= 1.0)) throw ParameterError("dim T must lie in [0, 1]");
}

void check_phi(double phi, int d) {
  if (!(phi >= 0.0 && phi <= d + 1.0)) throw ParameterError("phi_alpha must lie in [0, d + 1]");
}

void check_holder(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InputError("holder exponent must lie in (0, 1]");
}

double require_phi(const FormulaInputs& in) {
  if (!in.phi_alpha) throw InputError("phi_alpha is required");
  check_alpha(in.alpha);
  check_d(in.d);
  check_phi(*in.phi_alpha, in.d);
  return *in.phi_alpha;
}

// Picks the first fired branch. Evaluators never see boundary disagreement
// because formula_self_check guards the tables.
const Branch& pick(const std::vector<Branch>& branches) {
  for (const auto& b : branches) {
    if (b.fires) return b;
  }
  throw InputError("no formula branch applies to these inputs");
}

FormulaResult single(const std::vector<Branch>& branches, std::string tag, FormulaInputs in) {
  const auto& b = pick(branches);
  return FormulaResult{b.value, b.value, std::move(tag), std::string(b.name), std::move(in)};
}

FormulaInputs echo(double alpha, int d, double dim_t, std::optional<double> phi = std::nullopt,
                   std::optional<double> beta = std::nullopt) {
  return FormulaInputs{alpha, d, dim_t, phi, beta};
}

}  // namespace

std::vector<Branch> graph_dim_branches(const FormulaInputs& in) {
  const double phi = require_phi(in);
  const double a = in.alpha;
  return {
      {"alpha<=1", a <= 1.0, phi},
      {"alpha>=1", a >= 1.0, std::min(phi, phi / a + (1.0 - 1.0 / a) * in.d)},
  };
}

std::vector<Branch> range_dim_branches(const FormulaInputs& in) {
  const double phi = require_phi(in);
  const double a = in.alpha;
  const double d = in.d;
  return {
      {"alpha<=1", a <= 1.0, std::min(a * phi, d)},
      {"alpha>=1", a >= 1.0, std::min(phi, d)},
  };
}

std::vector<Branch> apriori_upper_branches(double alpha, int d, double phi) {
  check_alpha(alpha);
  check_d(d);
  check_phi(phi, d);
  return {
      {"alpha<=1", alpha <= 1.0, std::min(phi, alpha * phi + 1.0 - alpha)},
      {"alpha>=1", alpha >= 1.0, std::min(phi, phi / alpha + (1.0 - 1.0 / alpha) * d)},
  };
}

std::vector<Branch> apriori_lower_branches(double alpha, int d, double phi) {
  check_alpha(alpha);
  check_d(d);
  check_phi(phi, d);
  return {
      {"alpha<=1", alpha <= 1.0, std::max(0.0, phi + (1.0 - 1.0 / alpha) * d)},
      {"alpha>=1", alpha >= 1.0, std::max(0.0, phi + 1.0 - alpha)},
  };
}

std::vector<Branch> improvement_branches(double alpha, int d, double phi) {
  check_alpha(alpha);
  check_d(d);
  check_phi(phi, d);
  if (alpha > 1.0) throw NotApplicableError("improvement bound needs alpha <= 1");
  return {
      {"alpha*phi<=d", alpha * phi <= d, alpha * phi},
      {"alpha*phi>=d", alpha * phi >= d, phi + (1.0 - 1.0 / alpha) * d},
  };
}

std::vector<Branch> graph_phi_branches(double alpha, double dim_t) {
  check_alpha(alpha);
  check_dim_t(dim_t);
  return {
      {"alpha<=1", alpha <= 1.0, dim_t},
      {"alpha>=1", alpha >= 1.0, alpha * dim_t},
  };
}

std::vector<Branch> process_range_branches(double alpha, int d, double dim_t) {
  check_alpha(alpha);
  check_d(d);
  check_dim_t(dim_t);
  return {
      {"alpha*dimT<=d", alpha * dim_t <= d, alpha * dim_t},
      {"alpha*dimT>=d", alpha * dim_t >= d, static_cast<double>(d)},
  };
}

std::vector<Branch> holder_phi_branches(double alpha, int d, double dim_t, double beta) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  check_d(d);
  check_dim_t(dim_t);
  check_holder(beta);
  const double top = d + 1.0;
  const double inv = 1.0 / beta;
  return {
      {"alpha<=1", alpha <= 1.0,
       std::min({dim_t + d * (1.0 / alpha - beta), dim_t / (alpha * beta), top})},
      {"1<=alpha<=1/beta", alpha >= 1.0 && alpha <= inv,
       std::min({alpha * dim_t + d * (1.0 - alpha * beta), dim_t / beta, top})},
      {"alpha>=1/beta", alpha >= inv, std::min(alpha * dim_t, top)},
  };
}

// The split between the first two cases sits where 2 dim T + d (1 - 2 beta)
// reaches d + 1, i.e. beta = (2 dim T - 1) / (2d).
std::vector<Branch> brownian_graph_branches(int d, double dim_t, double beta) {
  check_d(d);
  check_dim_t(dim_t);
  check_holder(beta);
  const double dd = d;
  const double ratio = dim_t / dd;
  const double split = (2.0 * dim_t - 1.0) / (2.0 * dd);
  const double cap = std::min(ratio, 0.5);
  return {
      {"saturated", beta <= std::min(cap, split), dd + 0.5},
      {"rough", split <= beta && beta <= cap, dim_t + dd * (1.0 - beta)},
      {"holder", ratio <= beta && beta <= 0.5, dim_t / beta},
      {"smooth", beta >= 0.5, std::min(2.0 * dim_t, dim_t + dd / 2.0)},
  };
}

std::vector<Branch> brownian_range_branches(int d, double dim_t, double beta) {
  check_d(d);
  check_dim_t(dim_t);
  check_holder(beta);
  const double dd = d;
  const double ratio = dim_t / dd;
  return {
      {"holder", ratio <= beta && beta <= 0.5, dim_t / beta},
      {"smooth", beta >= 0.5, std::min(2.0 * dim_t, dd)},
      {"full", beta <= ratio && beta <= 0.5, dd},
  };
}

FormulaResult graph_dim_with_drift(const FormulaInputs& in) {
  return single(graph_dim_branches(in), "graph_with_drift", in);
}

FormulaResult range_dim_with_drift(const FormulaInputs& in) {
  return single(range_dim_branches(in), "range_with_drift", in);
}

FormulaResult apriori_bounds(double alpha, int d, double phi_alpha) {
  const auto uppers = apriori_upper_branches(alpha, d, phi_alpha);
  const auto lowers = apriori_lower_branches(alpha, d, phi_alpha);
  const auto& up = pick(uppers);
  const auto& low = pick(lowers);
  return FormulaResult{low.value, up.value, "apriori_bounds", std::string(up.name),
                       echo(alpha, d, 0.0, phi_alpha)};
}

FormulaResult apriori_reverse_bounds(double alpha, int d, double dim) {
  check_alpha(alpha);
  check_d(d);
  if (!(dim >= 0.0 && dim <= d + 1.0)) throw ParameterError("dim must lie in [0, d + 1]");
  double lo = 0.0;
  double hi = 0.0;
  std::string branch;
  if (alpha <= 1.0) {
    lo = std::max(dim, (dim - 1.0 + alpha) / alpha);
    hi = dim + (1.0 / alpha - 1.0) * d;
    branch = "alpha<=1";
  } else {
    lo = std::max(dim, alpha * dim - (alpha - 1.0) * d);
    hi = dim + alpha - 1.0;
    branch = "alpha>=1";
  }
  lo = std::max(lo, 0.0);
  hi = std::min(hi, d + 1.0);
  if (lo > hi) throw InputError("no parabolic dimension is consistent with this dimension");
  return FormulaResult{lo, hi, "apriori_reverse_bounds", branch, echo(alpha, d, 0.0)};
}

FormulaResult improvement_bound(double alpha, int d, double phi_alpha) {
  const auto branches = improvement_branches(alpha, d, phi_alpha);
  const auto& b = pick(branches);
  return FormulaResult{b.value, d + 1.0, "improvement_bound", std::string(b.name),
                       echo(alpha, d, 0.0, phi_alpha)};
}

FormulaResult constant_drift_phi(double alpha, double dim_t) {
  return single(graph_phi_branches(alpha, dim_t), "constant_drift_phi", echo(alpha, 1, dim_t));
}

FormulaResult process_graph_phi(double alpha, double dim_t) {
  return single(graph_phi_branches(alpha, dim_t), "process_graph_phi", echo(alpha, 1, dim_t));
}

FormulaResult process_range_dim(double alpha, int d, double dim_t) {
  return single(process_range_branches(alpha, d, dim_t), "process_range_dim", echo(alpha, d, dim_t));
}

FormulaResult holder_phi_upper(double alpha, int d, double dim_t, double holder_beta) {
  auto r = single(holder_phi_branches(alpha, d, dim_t, holder_beta), "holder_phi_upper",
                  echo(alpha, d, dim_t, std::nullopt, holder_beta));
  r.lo = 0.0;
  return r;
}

BrownianBounds brownian_holder_bounds(int d, double dim_t, double holder_beta) {
  const auto in = echo(2.0, d, dim_t, std::nullopt, holder_beta);
  auto g = single(brownian_graph_branches(d, dim_t, holder_beta), "brownian_graph_bound", in);
  auto r = single(brownian_range_branches(d, dim_t, holder_beta), "brownian_range_bound", in);
  g.lo = 0.0;
  r.lo = 0.0;
  return {std::move(g), std::move(r)};
}

FormulaResult fbm_graph_phi(double hurst, double dim_t) {
  if (!(hurst > 0.0 && hurst <= 1.0)) throw ParameterError("Hurst index must lie in (0, 1]");
  check_dim_t(dim_t);
  const double v = dim_t / hurst;
  return FormulaResult{v, v, "fbm_graph_phi", "single", echo(1.0 / hurst, 1, dim_t)};
}

namespace {

struct Checker {
  SelfCheckReport& report;
  double tolerance;

  void visit(std::string_view formula, const std::vector<Branch>& branches, bool generic,
             const std::string& where) {
    ++report.points;
    if (generic) ++report.generic_points;
    std::size_t fired = 0;
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& b : branches) {
      if (!b.fires) continue;
      if (fired == 0) lo = hi = b.value;
      lo = std::min(lo, b.value);
      hi = std::max(hi, b.value);
      ++fired;
    }
    report.max_disagreement = std::max(report.max_disagreement, hi - lo);
    std::string problem;
    if (fired == 0) {
      problem = "no branch fires";
    } else if (generic && fired != 1) {
      problem = "several branches fire off a boundary";
    } else if (hi - lo > tolerance) {
      problem = fmt::format("boundary branches disagree by {:.3e}", hi - lo);
    }
    if (fired > 1) ++report.multi_fire;
    if (!problem.empty()) {
      ++report.failures;
      if (report.messages.size() < 16) {
        report.messages.push_back(fmt::format("{} at {}: {}", formula, where, problem));
      }
    }
  }

  void all(double alpha, double beta, int d, double dim_t, double phi, bool generic) {
    const std::string where =
        fmt::format("alpha={} beta={} d={} dimT={} phi={}", alpha, beta, d, dim_t, phi);
    if (alpha <= 2.0) {
      const FormulaInputs in{alpha, d, dim_t, phi, beta};
      visit("graph_with_drift", graph_dim_branches(in), generic, where);
      visit("range_with_drift", range_dim_branches(in), generic, where);
      visit("apriori_upper", apriori_upper_branches(alpha, d, phi), generic, where);
      visit("apriori_lower", apriori_lower_branches(alpha, d, phi), generic, where);
      if (alpha <= 1.0) visit("improvement", improvement_branches(alpha, d, phi), generic, where);
      visit("graph_phi", graph_phi_branches(alpha, dim_t), generic, where);
      visit("process_range", process_range_branches(alpha, d, dim_t), generic, where);
    }
    visit("holder_phi", holder_phi_branches(alpha, d, dim_t, beta), generic, where);
    visit("brownian_graph", brownian_graph_branches(d, dim_t, beta), generic, where);
    visit("brownian_range", brownian_range_branches(d, dim_t, beta), generic, where);
  }
};

}  // namespace

SelfCheckReport formula_self_check(double tolerance) {
  SelfCheckReport report;
  Checker check{report, tolerance};

  // Boundary lattice: every branch predicate is hit with equality somewhere.
  const std::vector<double> dims{0.0, 0.25, 0.5, std::log(2.0) / std::log(3.0), 0.75, 1.0};
  const std::vector<double> betas{0.1, 0.2, 0.25, 0.3, 1.0 / 3.0, 0.4, 0.5, 0.6, 0.75, 1.0};
  for (int d = 1; d <= 3; ++d) {
    for (double dim_t : dims) {
      std::vector<double> bs = betas;
      bs.push_back(dim_t / d);
      bs.push_back((2.0 * dim_t - 1.0) / (2.0 * d));
      for (double beta : bs) {
        if (!(beta > 0.0 && beta <= 1.0)) continue;
        std::vector<double> alphas{0.25, 0.5, 0.7, 1.0, 1.25, 1.5, 1.8, 2.0, 1.0 / beta};
        for (double alpha : alphas) {
          std::vector<double> phis;
          for (int i = 0; i <= 2 * (d + 1); ++i) phis.push_back(0.5 * i);
          if (d / alpha <= d + 1.0) phis.push_back(d / alpha);
          for (double phi : phis) check.all(alpha, beta, d, dim_t, phi, false);
        }
      }
    }
  }

  // Generic lattice: points drawn off every boundary with probability one.
  Stream rng(0xf0f0f0f0ULL, 12);
  for (int i = 0; i < 20000; ++i) {
    const int d = 1 + static_cast<int>(rng.uniform() * 3.0);
    const double alpha = 2.0 * rng.uniform();
    const double beta = rng.uniform();
    const double dim_t = rng.uniform();
    const double phi = (d + 1.0) * rng.uniform();
    check.all(alpha, beta, d, dim_t, phi, true);
  }
  return report;
}

}  // namespace parafrac

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/errors.hpp"
#include "parafrac/stable_sim.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

double fitted_slope(const KernelSampler& s, bool kappa, bool in_tau, double beta, double fixed) {
  std::vector<double> xs, ys;
  for (int j = 2; j <= 10; ++j) {
    const double v = std::ldexp(1.0, -j);
    std::vector<double> delta(static_cast<std::size_t>(s.params().d), 0.0);
    delta[0] = in_tau ? fixed : v;
    const double tau = in_tau ? v : fixed;
    const auto e = kappa ? s.kernel_kappa(beta, tau, delta) : s.kernel_K(beta, tau, delta);
    xs.push_back(std::log(v));
    ys.push_back(std::log(e.value));
  }
  return stats::least_squares(xs, ys).slope;
}

TEST(Kernel, BetaZeroIsExactlyOne) {
  KernelQuery q{1.5, 2, 0.0, 0.3, {0.1, 0.2}, 1000};
  const auto k = kernel_K(q, 1);
  EXPECT_EQ(k.value, 1.0);
  EXPECT_EQ(k.std_error, 0.0);
  const auto kap = kernel_kappa(q, 1);
  EXPECT_EQ(kap.value, 1.0);
  EXPECT_EQ(kap.std_error, 0.0);
}

TEST(Kernel, QueryValidation) {
  EXPECT_THROW((KernelQuery{1.5, 1, 0.5, 0.0, {0.0}, 1000}.validate()), ParameterError);
  EXPECT_THROW((KernelQuery{1.5, 1, 0.5, 1.5, {0.0}, 1000}.validate()), ParameterError);
  EXPECT_THROW((KernelQuery{1.5, 1, 0.5, 0.5, {1.5}, 1000}.validate()), ParameterError);
  EXPECT_THROW((KernelQuery{1.5, 1, 0.5, 0.5, {0.0}, 10}.validate()), ParameterError);
  EXPECT_THROW((KernelQuery{1.5, 1, -0.5, 0.5, {0.0}, 1000}.validate()), ParameterError);
  EXPECT_THROW(kernel_kappa(KernelQuery{1.5, 1, 1.0, 0.5, {0.0}, 1000}, 1), ParameterError);
}

TEST(Kernel, TimeComponentBoundsK) {
  const KernelSampler s({1.2, 1, 1.0}, 20000, 4);
  const std::vector<double> zero{0.0};
  for (double tau : {0.5, 0.05, 0.001}) {
    for (double beta : {0.3, 1.0, 2.0}) {
      EXPECT_LE(s.kernel_K(beta, tau, zero).value, std::pow(tau, -beta) * (1.0 + 1e-12));
    }
  }
}

TEST(Kernel, EnvelopeSlopeKInTau) {
  const KernelSampler s({1.5, 1, 1.0}, 100000, 5);
  EXPECT_GE(fitted_slope(s, false, true, 0.5, 0.0), -0.5 / 1.5 - 0.1);
}

TEST(Kernel, EnvelopeSlopeKappaInTau) {
  const KernelSampler s({1.5, 2, 1.0}, 100000, 6);
  EXPECT_GE(fitted_slope(s, true, true, 1.0, 0.0), -1.0 / 1.5 - 0.1);
}

TEST(Kernel, EnvelopeSlopeKappaInDelta) {
  const KernelSampler s({1.5, 2, 1.0}, 100000, 7);
  // |tau| <= ||delta||^alpha across the whole sweep.
  EXPECT_GE(fitted_slope(s, true, false, 1.0, std::pow(2.0, -16)), -1.0 - 0.1);
}

TEST(Kernel, EnvelopeExponents) {
  EXPECT_DOUBLE_EQ(envelope_exponent(false, true, 1.5, 1, 0.5), -0.5 / 1.5);
  EXPECT_DOUBLE_EQ(envelope_exponent(true, true, 1.5, 2, 1.0), -1.0 / 1.5);
  EXPECT_DOUBLE_EQ(envelope_exponent(true, false, 1.5, 2, 1.0), -1.0);
  EXPECT_NEAR(envelope_exponent(false, true, 1.5, 1, 1.5), (1.0 - 1.0 / 1.5) - 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(envelope_exponent(false, true, 0.7, 1, 2.0), -2.0);
  EXPECT_DOUBLE_EQ(envelope_exponent(false, false, 1.5, 2, 1.0), -1.0);
  EXPECT_THROW(envelope_exponent(false, false, 1.5, 1, 1.5), NotApplicableError);
}

TEST(Kernel, LogConvexInBeta) {
  const KernelSampler s({1.3, 2, 1.0}, 50000, 8);
  const std::vector<double> delta{0.05, 0.0};
  for (double tau : {0.5, 0.01}) {
    for (double b = 0.2; b <= 1.6; b += 0.2) {
      const double lo = std::log(s.kernel_K(b - 0.1, tau, delta).value);
      const double mid = std::log(s.kernel_K(b, tau, delta).value);
      const double hi = std::log(s.kernel_K(b + 0.1, tau, delta).value);
      EXPECT_LE(mid, 0.5 * (lo + hi) + 1e-12);
    }
  }
}

TEST(Kernel, TranslationRobustness) {
  const KernelSampler s({1.5, 2, 1.0}, 50000, 9);
  const std::vector<double> zero{0.0, 0.0};
  for (double tau : {0.3, 0.01}) {
    const auto base = s.kernel_K(1.2, tau, zero);
    for (double r : {0.01, 0.1, 0.5, 1.0}) {
      const std::vector<double> delta{r / std::sqrt(2.0), r / std::sqrt(2.0)};
      const auto shifted = s.kernel_K(1.2, tau, delta);
      EXPECT_LE(shifted.value, 2.0 * base.value + 3.0 * shifted.std_error);
    }
  }
}

TEST(Kernel, ThreadIndependent) {
  const KernelSampler a({1.1, 2, 1.0}, 30000, 10, 1);
  const KernelSampler b({1.1, 2, 1.0}, 30000, 10, 3);
  const std::vector<double> delta{0.1, 0.2};
  EXPECT_EQ(a.kernel_K(0.7, 0.2, delta).value, b.kernel_K(0.7, 0.2, delta).value);
}

TEST(Frostman, IntervalWeights) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::interval, 6), DriftSpec::zero(2));
  ASSERT_EQ(mu.size(), 65U);
  for (double w : mu.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 65.0);
  for (double x : mu.space) EXPECT_EQ(x, 0.0);
}

TEST(Frostman, CantorCylinderMass) {
  const int n = 10;
  const auto ts = build_time_set(TimeSetKind::cantor, n);
  const auto mu = frostman_candidate(ts, DriftSpec::zero(1));
  for (double w : mu.weights) EXPECT_DOUBLE_EQ(w, std::ldexp(1.0, -n));
  for (int m = 0; m <= n; ++m) {
    const auto coarse = build_time_set(TimeSetKind::cantor, m);
    const double len = coarse.resolution();
    for (double left : coarse.points) {
      double mass = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.times[i] >= left - 1e-12 && mu.times[i] < left + len - 1e-12) mass += mu.weights[i];
      }
      EXPECT_NEAR(mass, std::ldexp(1.0, -m), 1e-12);
    }
  }
}

TEST(Energy, TwoAtoms) {
  DiscreteMeasure mu{1, {0.0, 0.5}, {0.0, 0.0}, {0.5, 0.5}};
  EnergyOptions o;
  o.levels = {0, 1, 2};
  EXPECT_DOUBLE_EQ(energy_integral(mu, EnergyKernel::euclidean_beta, 1.0, o).total, 1.0);
}

TEST(Energy, NeedsTwoAtoms) {
  DiscreteMeasure mu{1, {0.0}, {0.0}, {1.0}};
  EXPECT_THROW(energy_integral(mu, EnergyKernel::euclidean_beta, 1.0), InsufficientDataError);
}

TEST(Energy, LebesgueVerdicts) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::interval, 12), DriftSpec::zero(1));
  EXPECT_EQ(energy_integral(mu, EnergyKernel::euclidean_beta, 0.5).verdict, Verdict::converging);
  EXPECT_EQ(energy_integral(mu, EnergyKernel::euclidean_beta, 1.2).verdict, Verdict::diverging);
}

TEST(Energy, PartialSumsNondecreasing) {
  const auto path = simulate_path({1.5, 1, 1.0}, TimeGrid::uniform(1 << 10), 3);
  const auto mu = graph_measure(path, DriftSpec::zero(1));
  const std::vector<double> betas{0.5, 1.0, 1.5, 2.0};
  EnergyOptions o;
  o.levels = {0, 2, 4, 6, 8, 10};
  for (const auto& r : energy_sweep(mu, EnergyKernel::euclidean_beta, betas, o)) {
    EXPECT_GE(r.partial_sums.front(), 0.0);
    for (std::size_t j = 1; j < r.partial_sums.size(); ++j) EXPECT_GE(r.partial_sums[j], r.partial_sums[j - 1]);
    EXPECT_GE(r.total, r.partial_sums.back());
  }
}

TEST(Energy, RelabelAndTranslationInvariant) {
  const auto path = simulate_path({1.5, 2, 1.0}, TimeGrid::uniform(300), 4);
  const auto mu = graph_measure(path, DriftSpec::zero(2));
  DiscreteMeasure rev = mu;
  std::reverse(rev.times.begin(), rev.times.end());
  std::reverse(rev.weights.begin(), rev.weights.end());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < 2; ++j) rev.space[i * 2 + static_cast<std::size_t>(j)] =
        mu.space[(mu.size() - 1 - i) * 2 + static_cast<std::size_t>(j)] + 0.25;
  }
  const double a = energy_integral(mu, EnergyKernel::euclidean_beta, 1.3).total;
  const double b = energy_integral(rev, EnergyKernel::euclidean_beta, 1.3).total;
  EXPECT_NEAR(a, b, 1e-10 * a);
}

TEST(Energy, ThreadIndependent) {
  const auto path = simulate_path({1.2, 1, 1.0}, TimeGrid::uniform(2000), 5);
  const auto mu = graph_measure(path, DriftSpec::zero(1));
  EnergyOptions o1, o3;
  o3.threads = 3;
  const std::vector<double> betas{0.8, 1.4};
  const auto a = energy_sweep(mu, EnergyKernel::euclidean_beta, betas, o1);
  const auto b = energy_sweep(mu, EnergyKernel::euclidean_beta, betas, o3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].partial_sums, b[i].partial_sums);
    EXPECT_EQ(a[i].total, b[i].total);
  }
}

TEST(Energy, KernelEnergiesNeedUnitLags) {
  const auto ts = build_time_set(TimeSetKind::interval, 4, 1.0 / 3.0, 2.0);
  const auto mu = frostman_candidate(ts, DriftSpec::zero(1, 2.0));
  EXPECT_THROW(energy_integral(mu, EnergyKernel::K_beta, 0.5), PreconditionError);
}

TEST(Energy, KappaNeedsBetaBelowD) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::interval, 4), DriftSpec::zero(1));
  EXPECT_THROW(energy_integral(mu, EnergyKernel::kappa_beta, 1.0), ParameterError);
}

TEST(Verdict, Ratios) {
  double g = 0.0;
  const std::vector<double> flat{1.0, 2.0, 2.5};
  EXPECT_EQ(energy_verdict(flat, 1.1, 2.0, &g), Verdict::converging);
  EXPECT_DOUBLE_EQ(g, 0.5);
  const std::vector<double> steep{1.0, 2.0, 5.0};
  EXPECT_EQ(energy_verdict(steep, 1.1, 2.0), Verdict::diverging);
  const std::vector<double> mid{1.0, 2.0, 3.5};
  EXPECT_EQ(energy_verdict(mid, 1.1, 2.0), Verdict::inconclusive);
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(energy_verdict(two, 1.1, 2.0), InsufficientDataError);
}

TEST(Threshold, LebesgueSegment) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::interval, 13), DriftSpec::zero(1));
  const std::vector<DiscreteMeasure> fam{mu};
  const std::vector<double> grid{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
  const auto r = capacity_threshold(fam, EnergyKernel::euclidean_beta, grid);
  ASSERT_TRUE(r.beta_star.has_value()) << r.message;
  EXPECT_NEAR(*r.beta_star, 1.0, 0.1);
}

TEST(Threshold, VerdictsMonotoneOnGrid) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::cantor, 12), DriftSpec::zero(1));
  const std::vector<DiscreteMeasure> fam{mu};
  const std::vector<double> grid{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto r = capacity_threshold(fam, EnergyKernel::euclidean_beta, grid);
  bool seen_diverging = false;
  for (auto v : r.grid_verdicts) {
    if (seen_diverging) EXPECT_NE(v, Verdict::converging);
    seen_diverging = seen_diverging || v == Verdict::diverging;
  }
}

TEST(Threshold, MatchesExactSweep) {
  // The histogram evaluation used for the Euclidean kernel agrees with the
  // exact pairwise sum.
  const auto path = simulate_path({2.0, 1, 1.0}, TimeGrid::uniform(1 << 9), 6);
  const std::vector<DiscreteMeasure> fam{graph_measure(path, DriftSpec::zero(1))};
  const std::vector<double> grid{0.6, 0.9, 1.2, 1.5, 1.8};
  const auto r = capacity_threshold(fam, EnergyKernel::euclidean_beta, grid);
  const auto exact = energy_sweep(fam.front(), EnergyKernel::euclidean_beta, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < exact[i].partial_sums.size(); ++j) {
      EXPECT_NEAR(r.reports[i].partial_sums[j], exact[i].partial_sums[j], 1e-7 * exact[i].partial_sums[j]);
    }
    EXPECT_NEAR(r.reports[i].total, exact[i].total, 1e-7 * exact[i].total);
  }
}

TEST(Threshold, InconclusiveGrids) {
  const auto mu = frostman_candidate(build_time_set(TimeSetKind::interval, 10), DriftSpec::zero(1));
  const std::vector<DiscreteMeasure> fam{mu};
  const std::vector<double> low{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto a = capacity_threshold(fam, EnergyKernel::euclidean_beta, low);
  EXPECT_FALSE(a.beta_star.has_value());
  EXPECT_FALSE(a.message.empty());
  const std::vector<double> high{1.6, 1.8, 2.0, 2.2, 2.4};
  const auto b = capacity_threshold(fam, EnergyKernel::euclidean_beta, high);
  EXPECT_FALSE(b.beta_star.has_value());
  EXPECT_FALSE(b.message.empty());
  const std::vector<double> short_grid{0.5, 1.0};
  EXPECT_THROW(capacity_threshold(fam, EnergyKernel::euclidean_beta, short_grid), ParameterError);
}

}  // namespace
}  // namespace parafrac

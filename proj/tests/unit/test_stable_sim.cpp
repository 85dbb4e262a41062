#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "parafrac/errors.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stable_sim.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

std::vector<double> norms(const std::vector<double>& rows, int d) {
  std::vector<double> out(rows.size() / static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < d; ++j) sq += rows[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] *
                                      rows[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    out[i] = std::sqrt(sq);
  }
  return out;
}

TEST(PositiveStable, LaplaceTransformAtOne) {
  Stream rng(11, 0);
  stats::CompensatedSum s;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) s.add(std::exp(-sample_positive_stable(0.5, rng)));
  // exp(-S) lies in (0,1), so its standard deviation is below 1/2.
  EXPECT_NEAR(s.value() / n, std::exp(-1.0), 4.0 * 0.5 / std::sqrt(n));
}

TEST(PositiveStable, HalfIsLevyDistribution) {
  Stream rng(12, 0);
  std::vector<double> v(100000);
  for (auto& x : v) x = sample_positive_stable(0.5, rng);
  const auto ks = stats::ks_one_sample(v, [](double s) { return s <= 0.0 ? 0.0 : std::erfc(0.5 / std::sqrt(s)); });
  EXPECT_LT(ks.statistic, 0.005);
}

TEST(PositiveStable, NearOneConcentrates) {
  Stream rng(13, 0);
  std::vector<double> v(10001);
  for (auto& x : v) x = sample_positive_stable(0.999, rng);
  const double med = stats::quantile(v, 0.5);
  EXPECT_GT(med, 0.5);
  EXPECT_LT(med, 2.0);
}

TEST(PositiveStable, RejectsIndexOutsideUnitInterval) {
  Stream rng(1, 0);
  EXPECT_THROW(sample_positive_stable(0.0, rng), ParameterError);
  EXPECT_THROW(sample_positive_stable(1.0, rng), ParameterError);
  EXPECT_THROW(sample_positive_stable(-0.3, rng), ParameterError);
}

TEST(StableParams, Validation) {
  EXPECT_NO_THROW((StableParams{2.0, 1, 1.0}.validate()));
  EXPECT_THROW((StableParams{0.0, 1, 1.0}.validate()), ParameterError);
  EXPECT_THROW((StableParams{2.1, 1, 1.0}.validate()), ParameterError);
  EXPECT_THROW((StableParams{1.0, 0, 1.0}.validate()), ParameterError);
  EXPECT_THROW((StableParams{1.0, 1, 2.0}.validate()), ParameterError);
}

TEST(StableIncrement, GaussianVarianceTwo) {
  const auto v = sample_increments({2.0, 1, 1.0}, 1.0, 1000000, 21);
  const auto ms = stats::mean_stderr(v);
  double var = 0.0;
  for (double x : v) var += (x - ms.mean) * (x - ms.mean);
  var /= static_cast<double>(v.size() - 1);
  EXPECT_NEAR(var, 2.0, 0.02);
}

TEST(StableIncrement, CauchyQuartiles) {
  const auto v = sample_increments({1.0, 1, 1.0}, 1.0, 1000000, 22);
  EXPECT_NEAR(stats::quantile(v, 0.5), 0.0, 0.01);
  const double iqr = stats::quantile(v, 0.75) - stats::quantile(v, 0.25);
  EXPECT_NEAR(iqr, 2.0, 0.02);
}

TEST(StableIncrement, RejectsNonPositiveGap) {
  Stream rng(1, 0);
  EXPECT_THROW(sample_stable_increment({1.5, 1, 1.0}, 0.0, rng), ParameterError);
  EXPECT_THROW(sample_stable_increment({1.5, 1, 1.0}, -1.0, rng), ParameterError);
}

class SelfSimilarity : public ::testing::TestWithParam<double> {};

TEST_P(SelfSimilarity, ScaledDrawsMatch) {
  const double alpha = GetParam();
  const StableParams p{alpha, 1, 1.0};
  for (double c : {2.0, 4.0}) {
    const auto a = sample_increments(p, 0.5 * c, 100000, 31);
    auto b = sample_increments(p, 0.5, 100000, 32);
    for (auto& x : b) x *= std::pow(c, 1.0 / alpha);
    EXPECT_FALSE(stats::ks_two_sample(a, b).reject) << "alpha " << alpha << " c " << c;
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, SelfSimilarity, ::testing::Values(0.5, 1.0, 1.5, 2.0));

TEST(TailLaw, SurvivalSlopeIsMinusAlpha) {
  for (double alpha : {0.7, 1.5}) {
    const auto v = norms(sample_increments({alpha, 1, 1.0}, 1.0, 1000000, 41), 1);
    std::vector<double> xs, ys;
    for (double r = 10.0; r <= 100.0 + 1e-9; r *= std::pow(10.0, 0.125)) {
      const auto count = std::count_if(v.begin(), v.end(), [r](double x) { return x > r; });
      xs.push_back(std::log(r));
      ys.push_back(std::log(static_cast<double>(count) / static_cast<double>(v.size())));
    }
    EXPECT_NEAR(stats::least_squares(xs, ys).slope, -alpha, 0.15) << "alpha " << alpha;
  }
}

TEST(Isotropy, StablePlanePasses) {
  const auto v = sample_increments({1.5, 2, 1.0}, 1.0, 100000, 51);
  EXPECT_TRUE(isotropy_check(v, 2).pass);
}

TEST(Isotropy, GaussianSpacePasses) {
  const auto v = sample_increments({2.0, 3, 1.0}, 1.0, 100000, 52);
  EXPECT_TRUE(isotropy_check(v, 3).pass);
}

TEST(Isotropy, SkewedSamplesFail) {
  auto v = sample_increments({1.5, 2, 1.0}, 1.0, 100000, 53);
  for (std::size_t i = 0; i < v.size(); i += 2) v[i] *= 2.0;
  EXPECT_FALSE(isotropy_check(v, 2).pass);
}

TEST(Isotropy, Errors) {
  const auto one = sample_increments({1.5, 1, 1.0}, 1.0, 20000, 54);
  EXPECT_THROW(isotropy_check(one, 1), NotApplicableError);
  const auto few = sample_increments({1.5, 2, 1.0}, 1.0, 100, 55);
  EXPECT_THROW(isotropy_check(few, 2), InsufficientDataError);
}

TEST(TimeGrid, Invariants) {
  EXPECT_THROW(TimeGrid({0.1, 0.2}, 1.0), ParameterError);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5}, 1.0), ParameterError);
  EXPECT_THROW(TimeGrid({0.0, 1.5}, 1.0), ParameterError);
  const auto g = TimeGrid::uniform(4, 2.0);
  EXPECT_EQ(g.size(), 5U);
  EXPECT_DOUBLE_EQ(g.points().back(), 2.0);
  EXPECT_DOUBLE_EQ(g.max_gap(), 0.5);
}

TEST(SimulatePath, SinglePointStaysAtOrigin) {
  const auto p = simulate_path({1.2, 3, 1.0}, TimeGrid({0.0}, 1.0), 1);
  ASSERT_EQ(p.positions.size(), 3U);
  for (double x : p.positions) EXPECT_EQ(x, 0.0);
}

TEST(SimulatePath, StartsAtOriginWithOneRowPerPoint) {
  const auto grid = TimeGrid::uniform(1000);
  const auto p = simulate_path({0.8, 2, 1.0}, grid, 3);
  EXPECT_EQ(p.positions.size(), 2 * grid.size());
  EXPECT_EQ(p.position(0)[0], 0.0);
  EXPECT_EQ(p.position(0)[1], 0.0);
}

TEST(SimulatePath, DeterministicAcrossRunsAndThreads) {
  const auto grid = TimeGrid::uniform(1 << 14);
  const auto a = simulate_path({1.3, 2, 1.0}, grid, 77, 1);
  const auto b = simulate_path({1.3, 2, 1.0}, grid, 77, 1);
  const auto c = simulate_path({1.3, 2, 1.0}, grid, 77, 4);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.positions, c.positions);
  const auto other = simulate_path({1.3, 2, 1.0}, grid, 78, 1);
  EXPECT_NE(a.positions, other.positions);
}

TEST(SimulatePath, IncrementsStationary) {
  const auto grid = TimeGrid::uniform(40000);
  const auto p = simulate_path({1.5, 1, 1.0}, grid, 90);
  std::vector<double> first, second;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double inc = p.positions[i] - p.positions[i - 1];
    (i <= 20000 ? first : second).push_back(inc);
  }
  EXPECT_FALSE(stats::ks_two_sample(first, second).reject);
}

TEST(SimulatePath, IncrementLawMatchesDirectDraws) {
  // Increments over gap h have the law of h^(1/alpha) X_1.
  const double alpha = 1.2;
  const auto grid = TimeGrid::uniform(50000);
  const auto p = simulate_path({alpha, 1, 1.0}, grid, 91);
  std::vector<double> inc;
  for (std::size_t i = 1; i < grid.size(); ++i) inc.push_back(p.positions[i] - p.positions[i - 1]);
  auto ref = sample_increments({alpha, 1, 1.0}, 1.0, 50000, 92);
  for (auto& x : ref) x *= std::pow(1.0 / 50000.0, 1.0 / alpha);
  EXPECT_FALSE(stats::ks_two_sample(inc, ref).reject);
}

}  // namespace
}  // namespace parafrac

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "parafrac/errors.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5U);
  EXPECT_EQ(out[1], 0xe169c58dU);
  EXPECT_EQ(out[2], 0xbc57ac4cU);
  EXPECT_EQ(out[3], 0x9b00dbd8U);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32({0xffffffffU, 0xffffffffU, 0xffffffffU, 0xffffffffU}, {0xffffffffU, 0xffffffffU});
  EXPECT_EQ(out[0], 0x408f276dU);
  EXPECT_EQ(out[1], 0x41c83b0eU);
  EXPECT_EQ(out[2], 0xa20bc7c6U);
  EXPECT_EQ(out[3], 0x6d5451fdU);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32({0x243f6a88U, 0x85a308d3U, 0x13198a2eU, 0x03707344U}, {0xa4093822U, 0x299f31d0U});
  EXPECT_EQ(out[0], 0xd16cfe09U);
  EXPECT_EQ(out[1], 0x94fdccebU);
  EXPECT_EQ(out[2], 0x5001e420U);
  EXPECT_EQ(out[3], 0x24126ea1U);
}

TEST(SplitMix, KnownAnswer) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(mix_seed(0, 0), splitmix64(splitmix64(1)));
}

TEST(MixSeed, DistinctAcrossReplicas) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix_seed(42, i));
  EXPECT_EQ(seen.size(), 10000U);
}

TEST(Stream, ReproducibleAndSubstreamsDiffer) {
  Stream a(5, 3);
  Stream b(5, 3);
  Stream c(5, 4);
  int equal_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    equal_c += x == c.next_u64();
  }
  EXPECT_EQ(equal_c, 0);
}

TEST(Stream, UniformInOpenInterval) {
  Stream s(1, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Stream, NormalMoments) {
  Stream s(2, 0);
  std::vector<double> v(200000);
  for (auto& x : v) x = s.normal();
  const auto ms = stats::mean_stderr(v);
  double var = 0.0;
  for (double x : v) var += (x - ms.mean) * (x - ms.mean);
  var /= static_cast<double>(v.size() - 1);
  EXPECT_NEAR(ms.mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(LeastSquares, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = stats::least_squares(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.slope_stderr, 0.0);
}

TEST(LeastSquares, RejectsDegenerateInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(stats::least_squares(one, one), InsufficientDataError);
  const std::vector<double> x{1, 1, 1};
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW(stats::least_squares(x, y), Error);
}

TEST(CompensatedSum, RecoversLostBits) {
  stats::CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(stats::quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile({4, 1, 3, 2}, 0.25), 1.75);
}

TEST(ChiSquare, Survival) {
  EXPECT_NEAR(stats::chi_square_survival(3.841458820694124, 1.0), 0.05, 1e-9);
  EXPECT_NEAR(stats::chi_square_survival(2.0, 2.0), std::exp(-1.0), 1e-12);
}

TEST(Kolmogorov, CriticalValue) {
  // P(K > 1.6276) = 0.01 for the Kolmogorov distribution.
  EXPECT_NEAR(stats::kolmogorov_survival(1.62762), 0.01, 1e-4);
}

TEST(KsTest, SameAndShiftedSamples) {
  Stream s(9, 0);
  std::vector<double> a(20000), b(20000), c(20000);
  for (auto& x : a) x = s.normal();
  for (auto& x : b) x = s.normal();
  for (auto& x : c) x = s.normal() + 0.1;
  EXPECT_FALSE(stats::ks_two_sample(a, b).reject);
  EXPECT_TRUE(stats::ks_two_sample(a, c).reject);
  const auto one = stats::ks_one_sample(a, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_FALSE(one.reject);
}

}  // namespace
}  // namespace parafrac

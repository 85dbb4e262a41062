#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "parafrac/domains.hpp"
#include "parafrac/errors.hpp"
#include "parafrac/parabolic_cover.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stable_sim.hpp"

namespace parafrac {
namespace {

std::vector<int> range_levels(int a, int b) {
  std::vector<int> out;
  for (int k = a; k <= b; ++k) out.push_back(k);
  return out;
}

ScalingLedger make_ledger(double alpha, std::vector<int> levels, std::vector<std::uint64_t> counts) {
  ScalingLedger l;
  l.alpha = alpha;
  l.levels = std::move(levels);
  l.counts = std::move(counts);
  l.n_points = l.counts.empty() ? 0 : l.counts.back();
  l.dim = 2;
  return l;
}

PointCloud random_cloud(std::uint64_t seed, std::size_t n, std::size_t dim) {
  Stream s(seed, 0);
  PointCloud c{dim, true, {}};
  for (std::size_t i = 0; i < n * dim; ++i) c.data.push_back(s.uniform());
  return c;
}

TEST(CellIndex, Examples) {
  const std::vector<double> p1{0.6, 0.6};
  EXPECT_EQ(cell_index(1.0, 1, p1), (std::vector<std::int64_t>{1, 1}));
  const std::vector<double> p2{0.3, 0.8};
  EXPECT_EQ(cell_index(2.0, 2, p2), (std::vector<std::int64_t>{1, 1}));
  const std::vector<double> p3{0.25, 0.0};
  EXPECT_EQ(cell_index(1.0, 2, p3)[0], 1);
}

TEST(CellIndex, NegativeCoordinatesUseFloor) {
  const std::vector<double> p{0.1, -0.1};
  EXPECT_EQ(cell_index(1.0, 3, p)[1], -1);
}

TEST(Occupancy, SinglePoint) {
  const PointCloud c{2, true, {0.3, 0.7}};
  const auto l = occupancy(c, 1.5, range_levels(0, 20));
  for (auto n : l.counts) EXPECT_EQ(n, 1U);
}

TEST(Occupancy, EmptyCloudThrows) {
  const PointCloud c{2, true, {}};
  const auto levels = range_levels(1, 4);
  EXPECT_THROW(occupancy(c, 1.0, levels), ParameterError);
}

TEST(Occupancy, RangeCloudNeedsUnitAlpha) {
  const PointCloud c{1, false, {0.1, 0.2}};
  const auto levels = range_levels(1, 4);
  EXPECT_THROW(occupancy(c, 1.5, levels), ParameterError);
}

TEST(Occupancy, DiagonalLine) {
  PointCloud c{2, true, {}};
  const int n = 1 << 12;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    c.data.push_back(t);
    c.data.push_back(t);
  }
  const auto l = occupancy(c, 1.0, range_levels(1, 10));
  for (std::size_t j = 0; j < l.levels.size(); ++j) EXPECT_EQ(l.counts[j], 1ULL << l.levels[j]);
}

TEST(Occupancy, BoundsAndSubadditivity) {
  const auto a = random_cloud(1, 3000, 3);
  auto b = random_cloud(2, 2000, 3);
  for (auto& v : b.data) v += 0.5;
  PointCloud u = a;
  u.data.insert(u.data.end(), b.data.begin(), b.data.end());
  const auto levels = range_levels(0, 12);
  const auto la = occupancy(a, 1.3, levels);
  const auto lb = occupancy(b, 1.3, levels);
  const auto lu = occupancy(u, 1.3, levels);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    EXPECT_GE(la.counts[j], 1U);
    EXPECT_LE(la.counts[j], a.size());
    EXPECT_LE(lu.counts[j], la.counts[j] + lb.counts[j]);
    EXPECT_GE(lu.counts[j], std::max(la.counts[j], lb.counts[j]));
  }
}

TEST(Occupancy, MonotoneRefinement) {
  PointCloud c = random_cloud(3, 500, 2);
  const auto levels = range_levels(0, 14);
  auto prev = occupancy(c, 0.7, levels);
  Stream s(4, 0);
  for (int step = 0; step < 5; ++step) {
    for (int i = 0; i < 200; ++i) c.data.push_back(s.uniform());
    const auto next = occupancy(c, 0.7, levels);
    for (std::size_t j = 0; j < levels.size(); ++j) EXPECT_GE(next.counts[j], prev.counts[j]);
    prev = next;
  }
}

TEST(Occupancy, IndependentOfThreads) {
  const auto path = simulate_path({1.4, 2, 1.0}, TimeGrid::uniform(1 << 15), 9);
  const auto cloud = graph_cloud(path, DriftSpec::zero(2));
  const auto levels = range_levels(2, 13);
  const auto a = occupancy(cloud, 1.4, levels, 1);
  const auto b = occupancy(cloud, 1.4, levels, 3);
  EXPECT_EQ(a.counts, b.counts);
}

TEST(Occupancy, WideKeysFallBack) {
  // Many levels in several dimensions exceed a packed 64-bit key.
  const auto c = random_cloud(5, 4000, 6);
  const auto levels = range_levels(30, 33);
  const auto l = occupancy(c, 1.5, levels);
  for (auto n : l.counts) EXPECT_EQ(n, c.size());
}

TEST(Estimate, ExactPowerLaw) {
  const auto l = make_ledger(1.0, range_levels(1, 10), {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024});
  const auto e = estimate_dimension(l);
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_DOUBLE_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.window, range_levels(3, 8));
}

TEST(Estimate, ParabolicGaugeFourToTheK) {
  std::vector<std::uint64_t> counts;
  for (int k = 1; k <= 10; ++k) counts.push_back(1ULL << (2 * k));
  const auto e = estimate_dimension(make_ledger(2.0, range_levels(1, 10), counts), GaugeConvention::diam_gauge);
  EXPECT_DOUBLE_EQ(e.value, 4.0);
}

TEST(Estimate, TooFewLevels) {
  const auto l = make_ledger(1.0, {1, 2, 3}, {2, 4, 8});
  EXPECT_THROW(estimate_dimension(l), InsufficientDataError);
  const auto l7 = make_ledger(1.0, range_levels(1, 7), {2, 4, 8, 16, 32, 64, 128});
  EXPECT_THROW(estimate_dimension(l7), InsufficientDataError);
}

TEST(Estimate, GaugeIdentityOnRandomLedgers) {
  Stream s(17, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = 0.2 + 1.8 * s.uniform();
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 1;
    for (int k = 0; k < 12; ++k) {
      n += static_cast<std::uint64_t>(s.uniform() * 1000.0);
      counts.push_back(n);
    }
    const auto l = make_ledger(alpha, range_levels(0, 11), counts);
    EXPECT_EQ(estimate_dimension(l, GaugeConvention::time_gauge).value,
              estimate_dimension(l, GaugeConvention::diam_gauge).value);
  }
}

TEST(Estimate, UnionIsStable) {
  const auto p1 = simulate_path({2.0, 1, 1.0}, TimeGrid::uniform(1 << 16), 1);
  const auto p2 = simulate_path({1.2, 1, 1.0}, TimeGrid::uniform(1 << 16), 2);
  const auto a = graph_cloud(p1, DriftSpec::zero(1));
  const auto b = graph_cloud(p2, DriftSpec::zero(1));
  PointCloud u = a;
  u.data.insert(u.data.end(), b.data.begin(), b.data.end());
  const auto levels = range_levels(2, 10);
  const double ea = estimate_dimension(occupancy(a, 1.0, levels)).value;
  const double eb = estimate_dimension(occupancy(b, 1.0, levels)).value;
  const double eu = estimate_dimension(occupancy(u, 1.0, levels)).value;
  EXPECT_GE(eu, std::max(ea, eb) - 0.05);
}

TEST(Estimate, BoundedByAmbientDimension) {
  const auto path = simulate_path({0.5, 2, 1.0}, TimeGrid::uniform(1 << 14), 4);
  const auto levels = range_levels(2, 12);
  const auto g = estimate_dimension(occupancy(graph_cloud(path, DriftSpec::zero(2)), 1.0, levels));
  EXPECT_GE(g.value, 0.0);
  EXPECT_LE(g.value, 3.0);
  const auto r = estimate_dimension(occupancy(range_cloud(path, DriftSpec::zero(2)), 1.0, levels));
  EXPECT_GE(r.value, 0.0);
  EXPECT_LE(r.value, 2.0);
}

TEST(HitCount, ConstantPathVisitsOneCell) {
  PathSample p{{1.5, 2, 1.0}, TimeGrid::uniform(256), std::vector<double>(2 * 257, 0.0), 0};
  for (auto m : hit_count_statistic(p, 4)) EXPECT_EQ(m, 1U);
}

TEST(HitCount, CoarseGridThrows) {
  const auto p = simulate_path({1.5, 1, 1.0}, TimeGrid::uniform(16), 1);
  EXPECT_THROW(hit_count_statistic(p, 4), PreconditionError);
  EXPECT_NO_THROW(hit_count_statistic(p, 2));
}

TEST(Clouds, ZeroDriftGraphIsPath) {
  const auto p = simulate_path({1.1, 2, 1.0}, TimeGrid::uniform(100), 3);
  const auto g = graph_cloud(p, DriftSpec::zero(2));
  ASSERT_EQ(g.dim, 3U);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(g.row(i)[0], p.grid.points()[i]);
    EXPECT_EQ(g.row(i)[1], p.position(i)[0]);
    EXPECT_EQ(g.row(i)[2], p.position(i)[1]);
  }
}

TEST(Clouds, ConstantDriftShiftsRangeCounts) {
  const auto p = simulate_path({1.5, 2, 1.0}, TimeGrid::uniform(1 << 14), 3);
  const auto levels = range_levels(0, 12);
  const auto base = occupancy(range_cloud(p, DriftSpec::zero(2)), 1.0, levels);
  const auto moved = occupancy(range_cloud(p, DriftSpec::constant_vector({0.3141, -0.2718})), 1.0, levels);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    EXPECT_LE(moved.counts[j], 4 * base.counts[j]);
    EXPECT_LE(base.counts[j], 4 * moved.counts[j]);
  }
}

TEST(Clouds, NegativePathDriftCancels) {
  const auto p = simulate_path({1.5, 2, 1.0}, TimeGrid::uniform(1000), 3);
  PathSample neg = p;
  for (auto& v : neg.positions) v = -v;
  const auto r = range_cloud(p, DriftSpec::sampled_path(neg));
  const auto l = occupancy(r, 1.0, range_levels(0, 10));
  for (auto n : l.counts) EXPECT_EQ(n, 1U);
}

TEST(DefaultLevels, CouplingRule) {
  const auto lv = default_parabolic_levels(std::ldexp(1.0, -20));
  EXPECT_EQ(lv.front(), 2);
  EXPECT_EQ(lv.back(), 18);
  EXPECT_GE(std::ldexp(1.0, -lv.back()), 4.0 * std::ldexp(1.0, -20));
}

}  // namespace
}  // namespace parafrac

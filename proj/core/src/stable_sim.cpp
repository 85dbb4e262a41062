#include "parafrac/stable_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "parafrac/errors.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (0, 2]");
  if (d < 1) throw ParameterError("spatial dimension d must be >= 1");
  if (scale_c != 1.0) throw ParameterError("scale_c is fixed to 1");
}

TimeGrid::TimeGrid(std::vector<double> points, double t_max)
    : points_(std::move(points)), t_max_(t_max) {
  if (points_.empty() || points_.front() != 0.0) {
    throw ParameterError("time grid must start at 0");
  }
  if (!(t_max_ > 0.0)) throw ParameterError("time grid horizon must be positive");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw ParameterError("time grid must be strictly increasing");
    }
  }
  if (points_.back() > t_max_) throw ParameterError("time grid exceeds its horizon");
}

TimeGrid TimeGrid::uniform(std::size_t n_intervals, double t_max) {
  if (n_intervals == 0) return TimeGrid({0.0}, t_max);
  std::vector<double> pts(n_intervals + 1);
  for (std::size_t i = 0; i <= n_intervals; ++i) {
    pts[i] = t_max * static_cast<double>(i) / static_cast<double>(n_intervals);
  }
  pts.back() = t_max;
  return TimeGrid(std::move(pts), t_max);
}

double TimeGrid::max_gap() const noexcept {
  double g = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) g = std::max(g, points_[i] - points_[i - 1]);
  return g;
}

double TimeGrid::min_gap() const noexcept {
  if (points_.size() < 2) return 0.0;
  double g = points_[1] - points_[0];
  for (std::size_t i = 2; i < points_.size(); ++i) g = std::min(g, points_[i] - points_[i - 1]);
  return g;
}

double sample_positive_stable(double beta, Stream& rng) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("positive stable index must lie in (0, 1)");
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  const double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
  const double b = std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
  return a * b;
}

void sample_stable_increment(const StableParams& params, double dt, Stream& rng,
                             std::span<double> out) {
  if (!(dt > 0.0)) throw ParameterError("increment duration must be positive");
  double s = dt;
  if (params.alpha < 2.0) {
    s = std::pow(dt, 2.0 / params.alpha) * sample_positive_stable(0.5 * params.alpha, rng);
  }
  const double scale = std::sqrt(2.0 * s);
  for (auto& x : out) x = scale * rng.normal();
}

std::vector<double> sample_stable_increment(const StableParams& params, double dt, Stream& rng) {
  params.validate();
  std::vector<double> out(static_cast<std::size_t>(params.d));
  sample_stable_increment(params, dt, rng, out);
  return out;
}

std::vector<double> sample_increments(const StableParams& params, double dt, std::size_t n,
                                      std::uint64_t seed) {
  params.validate();
  if (!(dt > 0.0)) throw ParameterError("increment duration must be positive");
  const auto d = static_cast<std::size_t>(params.d);
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    Stream rng(seed, i);
    sample_stable_increment(params, dt, rng, std::span<double>(out.data() + i * d, d));
  }
  return out;
}

PathSample simulate_path(const StableParams& params, const TimeGrid& grid, std::uint64_t seed,
                         unsigned threads) {
  params.validate();
  const auto d = static_cast<std::size_t>(params.d);
  const auto& t = grid.points();
  std::vector<double> pos(t.size() * d, 0.0);

  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = std::max<std::size_t>(begin, 1); i < end; ++i) {
      Stream rng(seed, i);
      sample_stable_increment(params, t[i] - t[i - 1], rng,
                              std::span<double>(pos.data() + i * d, d));
    }
  };
  threads = std::max(1U, threads);
  if (threads == 1 || t.size() < 4096) {
    fill(0, t.size());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (t.size() + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(t.size(), b + chunk);
      if (b < e) workers.emplace_back(fill, b, e);
    }
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) pos[i * d + j] += pos[(i - 1) * d + j];
  }
  return PathSample{params, grid, std::move(pos), seed};
}

IsotropyReport isotropy_check(std::span<const double> samples, int d, double threshold) {
  if (d < 2) throw NotApplicableError("isotropy test needs d >= 2");
  const auto du = static_cast<std::size_t>(d);
  const std::size_t n = samples.size() / du;
  if (n < 10000) throw InsufficientDataError("isotropy test needs at least 10^4 samples");

  constexpr int kBins = 32;
  const std::size_t planes = d == 2 ? 1 : du;
  IsotropyReport report;
  report.threshold = threshold;
  double min_p = 1.0;
  for (std::size_t plane = 0; plane < planes; ++plane) {
    const std::size_t a = plane;
    const std::size_t b = (plane + 1) % du;
    std::vector<double> counts(kBins, 0.0);
    double used = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = samples[i * du + a];
      const double y = samples[i * du + b];
      if (x == 0.0 && y == 0.0) continue;
      const double theta = std::atan2(y, x);
      auto bin = static_cast<int>((theta + std::numbers::pi) / (2.0 * std::numbers::pi) * kBins);
      bin = std::clamp(bin, 0, kBins - 1);
      counts[static_cast<std::size_t>(bin)] += 1.0;
      used += 1.0;
    }
    const double expected = used / kBins;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    report.statistic = std::max(report.statistic, chi2);
    min_p = std::min(min_p, stats::chi_square_survival(chi2, kBins - 1));
  }
  report.p_value = std::min(1.0, min_p * static_cast<double>(planes));
  report.pass = report.p_value >= threshold;
  return report;
}

}  // namespace parafrac

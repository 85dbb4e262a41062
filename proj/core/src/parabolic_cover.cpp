#include "parafrac/parabolic_cover.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include <boost/container_hash/hash.hpp>

#include "parafrac/errors.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

constexpr double kIndexLimit = 4.0e18;

std::int64_t floor_index(double v) {
  const double f = std::floor(v);
  if (!(std::abs(f) < kIndexLimit)) throw ParameterError("cell index out of range");
  return static_cast<std::int64_t>(f);
}

// Per-axis multipliers turning a coordinate into a cell coordinate at level k.
std::vector<double> axis_scales(std::size_t dim, bool has_time, double alpha, int k) {
  std::vector<double> s(dim, std::exp2(static_cast<double>(k) / alpha));
  if (has_time && dim > 0) s[0] = std::ldexp(1.0, k);
  return s;
}

struct VecHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
    return boost::hash_range(v.begin(), v.end());
  }
};

template <class Body>
void parallel_chunks(std::size_t n, unsigned threads, Body body) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n / 65536, 1))));
  if (threads == 1) {
    body(0U, std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t b = std::min(n, w * chunk);
    const std::size_t e = std::min(n, b + chunk);
    workers.emplace_back([&body, w, b, e] { body(w, b, e); });
  }
}

std::uint64_t count_level(const PointCloud& cloud, double alpha, int k, unsigned threads) {
  const std::size_t dim = cloud.dim;
  const std::size_t n = cloud.size();
  const auto scale = axis_scales(dim, cloud.has_time, alpha, k);

  std::vector<std::int64_t> lo(dim, std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> hi(dim, std::numeric_limits<std::int64_t>::min());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const auto c = floor_index(cloud.data[i * dim + j] * scale[j]);
      lo[j] = std::min(lo[j], c);
      hi[j] = std::max(hi[j], c);
    }
  }
  std::vector<int> shift(dim, 0);
  int bits = 0;
  for (std::size_t j = 0; j < dim; ++j) {
    shift[j] = bits;
    const auto span = static_cast<std::uint64_t>(hi[j] - lo[j]);
    bits += std::max(1, static_cast<int>(std::bit_width(span)));
  }

  if (bits <= 64) {
    std::vector<std::unordered_set<std::uint64_t>> parts(std::max(1U, threads));
    parallel_chunks(n, threads, [&](unsigned w, std::size_t b, std::size_t e) {
      auto& set = parts[w];
      set.reserve((e - b) / 4 + 16);
      std::uint64_t prev = 0;
      bool have_prev = false;
      for (std::size_t i = b; i < e; ++i) {
        std::uint64_t key = 0;
        for (std::size_t j = 0; j < dim; ++j) {
          const auto c = static_cast<std::int64_t>(std::floor(cloud.data[i * dim + j] * scale[j]));
          key |= static_cast<std::uint64_t>(c - lo[j]) << shift[j];
        }
        if (have_prev && key == prev) continue;
        set.insert(key);
        prev = key;
        have_prev = true;
      }
    });
    auto& all = *std::max_element(parts.begin(), parts.end(),
                                  [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (auto& p : parts) {
      if (&p != &all) all.insert(p.begin(), p.end());
    }
    return all.size();
  }

  std::unordered_set<std::vector<std::int64_t>, VecHash> set;
  std::vector<std::int64_t> key(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) key[j] = floor_index(cloud.data[i * dim + j] * scale[j]);
    set.insert(key);
  }
  return set.size();
}

std::vector<int> level_range(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

}  // namespace

std::vector<std::int64_t> cell_index(double alpha, int k, std::span<const double> point) {
  if (k < 0) throw ParameterError("cell level must be >= 0");
  if (!(alpha > 0.0)) throw ParameterError("anisotropy index must be positive");
  const auto scale = axis_scales(point.size(), true, alpha, k);
  std::vector<std::int64_t> out(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) out[j] = floor_index(point[j] * scale[j]);
  return out;
}

std::string_view to_string(GaugeConvention c) noexcept {
  return c == GaugeConvention::time_gauge ? "time_gauge" : "diam_gauge";
}

double ScalingLedger::time_side(std::size_t i) const { return std::ldexp(1.0, -levels.at(i)); }

double ScalingLedger::space_side(std::size_t i) const {
  return std::exp2(-static_cast<double>(levels.at(i)) / alpha);
}

ScalingLedger occupancy(const PointCloud& cloud, double alpha, std::span<const int> levels,
                        unsigned threads) {
  if (cloud.size() == 0) throw ParameterError("occupancy needs a non-empty cloud");
  if (levels.empty()) throw ParameterError("occupancy needs at least one level");
  if (!(alpha > 0.0)) throw ParameterError("anisotropy index must be positive");
  if (!cloud.has_time && alpha != 1.0) {
    throw ParameterError("range clouds are counted in cubes (alpha = 1)");
  }
  ScalingLedger ledger;
  ledger.alpha = alpha;
  ledger.levels.assign(levels.begin(), levels.end());
  ledger.n_points = cloud.size();
  ledger.dim = cloud.dim;
  ledger.has_time = cloud.has_time;
  for (int k : levels) {
    if (k < 0) throw ParameterError("cell level must be >= 0");
    ledger.counts.push_back(count_level(cloud, alpha, k, threads));
  }
  return ledger;
}

DimEstimate estimate_dimension(const ScalingLedger& ledger, GaugeConvention convention,
                               const EstimateOptions& options) {
  const auto n = static_cast<std::ptrdiff_t>(ledger.levels.size());
  const std::ptrdiff_t first = options.trim_coarse;
  const std::ptrdiff_t last = n - options.trim_fine;
  if (last - first < static_cast<std::ptrdiff_t>(options.min_levels)) {
    throw InsufficientDataError("dimension estimate needs at least 4 levels after trimming");
  }
  std::vector<double> x, y;
  DimEstimate est;
  est.convention = convention;
  for (auto i = first; i < last; ++i) {
    const auto u = static_cast<std::size_t>(i);
    est.window.push_back(ledger.levels[u]);
    x.push_back(static_cast<double>(ledger.levels[u]));
    y.push_back(std::log2(static_cast<double>(ledger.counts[u])));
  }
  const auto fit = stats::least_squares(x, y);
  const double gauge = std::max(ledger.alpha, 1.0);
  est.value = fit.slope * gauge;
  est.std_error = fit.slope_stderr * gauge;
  return est;
}

std::vector<std::uint32_t> hit_count_statistic(const PathSample& path, int k) {
  if (k < 0) throw ParameterError("cell level must be >= 0");
  const double side = std::ldexp(1.0, -k);
  if (path.grid.max_gap() > side / 4.0) {
    throw PreconditionError("path grid too coarse for hit counts at this level");
  }
  const double alpha = path.params.alpha;
  const auto d = static_cast<std::size_t>(path.params.d);
  const double space_scale = std::exp2(static_cast<double>(k) / alpha);
  const auto& t = path.grid.points();

  std::vector<std::uint32_t> out;
  std::vector<std::vector<std::int64_t>> cells;
  std::size_t i = 0;
  while (i < t.size()) {
    const auto window = floor_index(t[i] / side);
    cells.clear();
    for (; i < t.size() && floor_index(t[i] / side) == window; ++i) {
      std::vector<std::int64_t> c(d);
      for (std::size_t j = 0; j < d; ++j) c[j] = floor_index(path.positions[i * d + j] * space_scale);
      cells.push_back(std::move(c));
    }
    std::sort(cells.begin(), cells.end());
    out.push_back(static_cast<std::uint32_t>(std::unique(cells.begin(), cells.end()) - cells.begin()));
  }
  return out;
}

HitCountFit hit_count_fit(const PathSample& path, std::span<const int> levels) {
  if (levels.size() < 2) throw InsufficientDataError("hit count fit needs at least 2 levels");
  HitCountFit fit;
  std::vector<double> x;
  std::vector<double> y;
  for (int k : levels) {
    const auto m = hit_count_statistic(path, k);
    double sum = 0.0;
    for (auto v : m) sum += v;
    const double mean = sum / static_cast<double>(m.size());
    fit.levels.push_back(k);
    fit.means.push_back(mean);
    x.push_back(static_cast<double>(k));
    y.push_back(std::log2(mean));
  }
  fit.delta = stats::least_squares(x, y).slope;
  return fit;
}

PointCloud graph_cloud(const PathSample& path, const DriftSpec& drift) {
  const auto d = static_cast<std::size_t>(path.params.d);
  if (static_cast<std::size_t>(drift.d) != d) throw ParameterError("drift and path dimensions differ");
  const auto& t = path.grid.points();
  const double tscale = path.grid.t_max() > 1.0 ? 1.0 / path.grid.t_max() : 1.0;
  PointCloud cloud;
  cloud.dim = d + 1;
  cloud.has_time = true;
  cloud.data.resize(t.size() * (d + 1));
  std::vector<double> f(d);
  for (std::size_t i = 0; i < t.size(); ++i) {
    eval_drift(drift, t[i], f);
    cloud.data[i * (d + 1)] = t[i] * tscale;
    for (std::size_t j = 0; j < d; ++j) cloud.data[i * (d + 1) + 1 + j] = path.positions[i * d + j] + f[j];
  }
  return cloud;
}

PointCloud range_cloud(const PathSample& path, const DriftSpec& drift) {
  const auto d = static_cast<std::size_t>(path.params.d);
  if (static_cast<std::size_t>(drift.d) != d) throw ParameterError("drift and path dimensions differ");
  const auto& t = path.grid.points();
  PointCloud cloud;
  cloud.dim = d;
  cloud.has_time = false;
  cloud.data.resize(t.size() * d);
  std::vector<double> f(d);
  for (std::size_t i = 0; i < t.size(); ++i) {
    eval_drift(drift, t[i], f);
    for (std::size_t j = 0; j < d; ++j) cloud.data[i * d + j] = path.positions[i * d + j] + f[j];
  }
  return cloud;
}

std::vector<int> default_euclidean_graph_levels(std::size_t n_points) {
  const int lg = static_cast<int>(std::floor(std::log2(static_cast<double>(std::max<std::size_t>(n_points, 2)))));
  return level_range(2, lg / 2 + 2);
}

std::vector<int> default_parabolic_levels(double max_gap) {
  if (!(max_gap > 0.0)) throw ParameterError("grid spacing must be positive");
  return level_range(2, static_cast<int>(std::floor(std::log2(1.0 / max_gap))) - 2);
}

std::vector<int> default_range_levels(double max_gap, double alpha) {
  if (!(max_gap > 0.0)) throw ParameterError("grid spacing must be positive");
  const double kmax = (std::log2(1.0 / max_gap) - 2.0) / alpha;
  return level_range(2, static_cast<int>(std::floor(kmax + 1e-9)));
}

}  // namespace parafrac

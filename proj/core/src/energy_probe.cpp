#include "parafrac/energy_probe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "parafrac/errors.hpp"
#include "parafrac/rng.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

constexpr std::size_t kSampleBlock = 4096;
constexpr std::size_t kRowBlock = 32;

void check_increment(const StableParams& p, double tau, std::span<const double> delta) {
  if (!(std::abs(tau) > 0.0 && std::abs(tau) <= 1.0)) {
    throw ParameterError("kernel time increment must satisfy 0 < |tau| <= 1");
  }
  if (delta.size() != static_cast<std::size_t>(p.d)) {
    throw ParameterError("kernel space increment has the wrong dimension");
  }
  double sq = 0.0;
  for (double v : delta) sq += v * v;
  if (sq > 1.0) throw ParameterError("kernel space increment must have norm <= 1");
}

// Runs body(task) for task in [0, n_tasks) on up to `threads` workers.
template <class Body>
void for_tasks(std::size_t n_tasks, unsigned threads, Body body) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_tasks, 1))));
  if (threads == 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t t = next++; t < n_tasks; t = next++) body(t);
    });
  }
}

}  // namespace

void KernelQuery::validate() const {
  StableParams{alpha, d, 1.0}.validate();
  if (!(beta >= 0.0)) throw ParameterError("kernel exponent must be >= 0");
  if (n_mc < 1000) throw ParameterError("kernel queries need n_mc >= 1000");
  check_increment(StableParams{alpha, d, 1.0}, tau, delta);
}

KernelSampler::KernelSampler(const StableParams& params, std::size_t n_mc, std::uint64_t seed,
                             unsigned threads)
    : params_(params), n_(n_mc) {
  params_.validate();
  if (n_mc == 0) throw ParameterError("kernel sampler needs at least one draw");
  const auto d = static_cast<std::size_t>(params_.d);
  samples_.resize(n_ * d);
  const std::size_t blocks = (n_ + kSampleBlock - 1) / kSampleBlock;
  for_tasks(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n_, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) {
      Stream rng(seed, i);
      sample_stable_increment(params_, 1.0, rng, std::span<double>(samples_.data() + i * d, d));
    }
  });
}

KernelEstimate KernelSampler::reduce(double beta, double tau, std::span<const double> delta,
                                     bool with_time) const {
  check_increment(params_, tau, delta);
  if (!(beta >= 0.0)) throw ParameterError("kernel exponent must be >= 0");
  KernelEstimate est;
  if (beta == 0.0) {
    est.value = 1.0;
    return est;
  }
  const auto d = static_cast<std::size_t>(params_.d);
  const double scale = std::copysign(std::pow(std::abs(tau), 1.0 / params_.alpha), tau);
  const double t2 = with_time ? tau * tau : 0.0;
  stats::CompensatedSum sum;
  stats::CompensatedSum sum_sq;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    double sq = t2;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = scale * samples_[i * d + j] + delta[j];
      sq += v * v;
    }
    double r = std::sqrt(sq);
    if (r < kKernelClipFloor) {
      r = kKernelClipFloor;
      ++clipped;
    }
    const double k = std::pow(r, -beta);
    sum.add(k);
    sum_sq.add(k * k);
  }
  const double n = static_cast<double>(n_);
  est.value = sum.value() / n;
  const double var = std::max(0.0, sum_sq.value() / n - est.value * est.value);
  est.std_error = n > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  est.clip_rate = static_cast<double>(clipped) / n;
  est.valid = est.clip_rate < kMaxClipRate;
  return est;
}

KernelEstimate KernelSampler::kernel_K(double beta, double tau, std::span<const double> delta) const {
  return reduce(beta, tau, delta, true);
}

KernelEstimate KernelSampler::kernel_kappa(double beta, double tau,
                                           std::span<const double> delta) const {
  if (!(beta < params_.d)) throw ParameterError("kappa kernel needs beta < d");
  return reduce(beta, tau, delta, false);
}

KernelEstimate kernel_K(const KernelQuery& query, std::uint64_t seed) {
  query.validate();
  return KernelSampler({query.alpha, query.d, 1.0}, query.n_mc, seed)
      .kernel_K(query.beta, query.tau, query.delta);
}

KernelEstimate kernel_kappa(const KernelQuery& query, std::uint64_t seed) {
  query.validate();
  if (!(query.beta < query.d)) throw ParameterError("kappa kernel needs beta < d");
  return KernelSampler({query.alpha, query.d, 1.0}, query.n_mc, seed)
      .kernel_kappa(query.beta, query.tau, query.delta);
}

double envelope_exponent(bool kappa, bool in_tau, double alpha, int d, double beta) {
  StableParams{alpha, d, 1.0}.validate();
  if (!(beta >= 0.0)) throw ParameterError("kernel exponent must be >= 0");
  const double dd = d;
  if (kappa) {
    if (!(beta < dd)) throw ParameterError("kappa kernel needs beta < d");
    return in_tau ? -beta / alpha : -beta;
  }
  if (in_tau) {
    double e = -beta;
    if (beta < dd) e = std::max(e, -beta / alpha);
    if (beta > dd) e = std::max(e, (1.0 - 1.0 / alpha) * dd - beta);
    return e;
  }
  if (beta > dd) throw NotApplicableError("no delta envelope for the K kernel with beta > d");
  return -beta;
}

DiscreteMeasure frostman_candidate(const TimeSet& time_set, const DriftSpec& drift,
                                   bool clip_half_ball) {
  if (time_set.points.empty()) throw ParameterError("frostman candidate needs a non-empty time set");
  const auto n = time_set.points.size();
  const auto d = static_cast<std::size_t>(drift.d);
  DiscreteMeasure mu;
  mu.d = drift.d;
  mu.times = time_set.points;
  mu.space.resize(n * d);
  mu.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    eval_drift(drift, mu.times[i], std::span<double>(mu.space.data() + i * d, d));
  }
  if (clip_half_ball) clip_to_half_ball(mu.space, drift.d);
  return mu;
}

DiscreteMeasure graph_measure(const PathSample& path, const DriftSpec& drift) {
  const auto d = static_cast<std::size_t>(path.params.d);
  if (static_cast<std::size_t>(drift.d) != d) throw ParameterError("drift and path dimensions differ");
  const auto n = path.size();
  DiscreteMeasure mu;
  mu.d = path.params.d;
  mu.times = path.grid.points();
  mu.space = path.positions;
  mu.weights.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> f(d);
  for (std::size_t i = 0; i < n; ++i) {
    eval_drift(drift, mu.times[i], f);
    for (std::size_t j = 0; j < d; ++j) mu.space[i * d + j] += f[j];
  }
  return mu;
}

std::string_view to_string(EnergyKernel k) noexcept {
  switch (k) {
    case EnergyKernel::euclidean_beta: return "euclidean_beta";
    case EnergyKernel::K_beta: return "K_beta";
    case EnergyKernel::kappa_beta: return "kappa_beta";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::converging: return "converging";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::vector<int> default_energy_levels(std::size_t n_atoms) {
  const int top = static_cast<int>(std::floor(std::log2(static_cast<double>(std::max<std::size_t>(n_atoms, 2)))));
  const int step = std::max(1, std::min(6, top / 2));
  return {std::max(0, top - 2 * step), std::max(0, top - step), top};
}

Verdict energy_verdict(std::span<const double> s, double converging_ratio, double diverging_ratio,
                       double* growth_ratio) {
  if (s.size() < 3) throw InsufficientDataError("energy verdict needs at least 3 mesh levels");
  const std::size_t n = s.size();
  const double last = s[n - 1] - s[n - 2];
  const double prev = s[n - 2] - s[n - 3];
  double g = 0.0;
  if (prev > 0.0) {
    g = last / prev;
  } else {
    g = last > 0.0 ? INFINITY : 0.0;
  }
  if (growth_ratio) *growth_ratio = g;
  if (g < converging_ratio) return Verdict::converging;
  if (g > diverging_ratio) return Verdict::diverging;
  return Verdict::inconclusive;
}

std::vector<EnergyReport> energy_sweep(const DiscreteMeasure& mu, EnergyKernel kernel,
                                       std::span<const double> betas,
                                       const EnergyOptions& options) {
  const std::size_t n = mu.size();
  if (n < 2) throw InsufficientDataError("energy needs at least 2 atoms");
  if (betas.empty()) throw ParameterError("energy sweep needs at least one exponent");
  for (double b : betas) {
    if (!(b >= 0.0)) throw ParameterError("energy exponent must be >= 0");
    if (kernel == EnergyKernel::kappa_beta && !(b < mu.d)) {
      throw ParameterError("kappa kernel needs beta < d");
    }
  }
  std::vector<int> levels = options.levels.empty() ? default_energy_levels(n) : options.levels;
  if (levels.size() < 3) throw InsufficientDataError("energy needs at least 3 mesh levels");
  if (!std::is_sorted(levels.begin(), levels.end())) throw ParameterError("mesh levels must be sorted");

  const auto d = static_cast<std::size_t>(mu.d);
  std::optional<KernelSampler> sampler;
  if (kernel != EnergyKernel::euclidean_beta) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(mu.times[i] - mu.times[0]) > 1.0) {
        throw PreconditionError("kernel energies need time lags <= 1");
      }
    }
    sampler.emplace(StableParams{options.alpha, mu.d, 1.0}, options.kernel_mc, options.seed,
                    options.threads);
  }

  // thresholds[m] = 2^-levels[m], decreasing in m. A pair with lag >= thresholds[m]
  // counts towards every partial sum from m on; bucket L collects the rest.
  const std::size_t nl = levels.size();
  const std::size_t nb = betas.size();
  std::vector<double> thresholds(nl);
  for (std::size_t m = 0; m < nl; ++m) thresholds[m] = std::ldexp(1.0, -levels[m]);
  const std::size_t stride = nl + 1;

  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<double> block_sums(blocks * nb * stride, 0.0);
  for_tasks(blocks, options.threads, [&](std::size_t blk) {
    std::vector<stats::CompensatedSum> acc(nb * stride);
    std::vector<double> row(nb * stride);
    const std::size_t row_end = std::min(n, (blk + 1) * kRowBlock);
    for (std::size_t i = blk * kRowBlock; i < row_end; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double tau = mu.times[j] - mu.times[i];
        const double lag = std::abs(tau);
        std::size_t bucket = nl;
        for (std::size_t m = 0; m < nl; ++m) {
          if (lag >= thresholds[m]) {
            bucket = m;
            break;
          }
        }
        const double w = 2.0 * mu.weights[i] * mu.weights[j];
        if (kernel == EnergyKernel::euclidean_beta) {
          double sq = tau * tau;
          for (std::size_t c = 0; c < d; ++c) {
            const double v = mu.space[j * d + c] - mu.space[i * d + c];
            sq += v * v;
          }
          const double lr = std::log(std::max(std::sqrt(sq), kKernelClipFloor));
          for (std::size_t b = 0; b < nb; ++b) row[b * stride + bucket] += w * std::exp(-betas[b] * lr);
          continue;
        }
        const auto& s = *sampler;
        std::vector<double> delta(d);
        for (std::size_t c = 0; c < d; ++c) delta[c] = mu.space[j * d + c] - mu.space[i * d + c];
        for (std::size_t b = 0; b < nb; ++b) {
          double k = 0.0;
          if (tau == 0.0) {
            double sq = 0.0;
            for (double v : delta) sq += v * v;
            k = std::pow(std::max(std::sqrt(sq), kKernelClipFloor), -betas[b]);
          } else if (kernel == EnergyKernel::K_beta) {
            k = s.kernel_K(betas[b], tau, delta).value;
          } else {
            k = s.kernel_kappa(betas[b], tau, delta).value;
          }
          row[b * stride + bucket] += w * k;
        }
      }
      for (std::size_t q = 0; q < nb * stride; ++q) acc[q].add(row[q]);
    }
    for (std::size_t q = 0; q < nb * stride; ++q) block_sums[blk * nb * stride + q] = acc[q].value();
  });

  std::vector<EnergyReport> reports;
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<stats::CompensatedSum> bucket(stride);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      for (std::size_t q = 0; q < stride; ++q) bucket[q].add(block_sums[(blk * nb + b) * stride + q]);
    }
    EnergyReport r;
    r.beta = betas[b];
    r.levels = levels;
    double running = 0.0;
    for (std::size_t m = 0; m < nl; ++m) {
      running += bucket[m].value();
      r.partial_sums.push_back(running);
    }
    r.total = running + bucket[nl].value();
    r.verdict = energy_verdict(r.partial_sums, options.converging_ratio, options.diverging_ratio,
                               &r.growth_ratio);
    reports.push_back(std::move(r));
  }
  return reports;
}

EnergyReport energy_integral(const DiscreteMeasure& mu, EnergyKernel kernel, double beta,
                             const EnergyOptions& options) {
  const double b[] = {beta};
  return energy_sweep(mu, kernel, b, options).front();
}

namespace {

constexpr double kBinsPerUnit = 256.0;
constexpr std::size_t kHistChunks = 16;
constexpr std::size_t kMoments = 4;

// Pair weights of a measure binned by mesh bucket and log distance, with the
// first four moments of the log distance about each bin centre. Euclidean
// energies for any beta follow from a truncated Taylor series per bin.
struct LagHistogram {
  std::vector<int> levels;
  double lr_min = 0.0;
  std::size_t bins = 0;
  std::vector<double> moments;  // [bucket][bin][moment]
};

LagHistogram build_histogram(const DiscreteMeasure& mu, const std::vector<int>& levels, unsigned threads) {
  const std::size_t n = mu.size();
  const auto d = static_cast<std::size_t>(mu.d);
  const std::size_t nl = levels.size();
  const std::size_t stride = nl + 1;
  std::vector<double> thresholds(nl);
  for (std::size_t m = 0; m < nl; ++m) thresholds[m] = std::ldexp(1.0, -levels[m]);

  double diam_sq = 0.0;
  {
    auto [tmin, tmax] = std::minmax_element(mu.times.begin(), mu.times.end());
    diam_sq += (*tmax - *tmin) * (*tmax - *tmin);
    for (std::size_t c = 0; c < d; ++c) {
      double lo = INFINITY;
      double hi = -INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, mu.space[i * d + c]);
        hi = std::max(hi, mu.space[i * d + c]);
      }
      diam_sq += (hi - lo) * (hi - lo);
    }
  }
  LagHistogram h;
  h.levels = levels;
  h.lr_min = std::log(kKernelClipFloor);
  const double lr_max = std::log(std::max(std::sqrt(diam_sq), kKernelClipFloor));
  h.bins = static_cast<std::size_t>(std::ceil((lr_max - h.lr_min) * kBinsPerUnit)) + 1;
  const std::size_t chunk_size = stride * h.bins * kMoments;

  std::vector<double> chunks(kHistChunks * chunk_size, 0.0);
  for_tasks(kHistChunks, threads, [&](std::size_t c) {
    double* acc = chunks.data() + c * chunk_size;
    for (std::size_t i = c; i < n; i += kHistChunks) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double tau = mu.times[j] - mu.times[i];
        const double lag = std::abs(tau);
        std::size_t bucket = nl;
        for (std::size_t m = 0; m < nl; ++m) {
          if (lag >= thresholds[m]) {
            bucket = m;
            break;
          }
        }
        double sq = tau * tau;
        for (std::size_t k = 0; k < d; ++k) {
          const double v = mu.space[j * d + k] - mu.space[i * d + k];
          sq += v * v;
        }
        const double lr = 0.5 * std::log(std::max(sq, kKernelClipFloor * kKernelClipFloor));
        const double pos = (lr - h.lr_min) * kBinsPerUnit;
        const auto bin = std::min(h.bins - 1, static_cast<std::size_t>(std::max(0.0, std::round(pos))));
        const double u = lr - (h.lr_min + static_cast<double>(bin) / kBinsPerUnit);
        const double w = 2.0 * mu.weights[i] * mu.weights[j];
        double* cell = acc + (bucket * h.bins + bin) * kMoments;
        cell[0] += w;
        cell[1] += w * u;
        cell[2] += w * u * u;
        cell[3] += w * u * u * u;
      }
    }
  });
  h.moments.assign(chunk_size, 0.0);
  for (std::size_t c = 0; c < kHistChunks; ++c) {
    for (std::size_t q = 0; q < chunk_size; ++q) h.moments[q] += chunks[c * chunk_size + q];
  }
  return h;
}

EnergyReport histogram_energy(const LagHistogram& h, double beta, const EnergyOptions& options) {
  const std::size_t nl = h.levels.size();
  EnergyReport r;
  r.beta = beta;
  r.levels = h.levels;
  double running = 0.0;
  for (std::size_t m = 0; m <= nl; ++m) {
    stats::CompensatedSum s;
    for (std::size_t bin = 0; bin < h.bins; ++bin) {
      const double* cell = h.moments.data() + (m * h.bins + bin) * kMoments;
      if (cell[0] == 0.0) continue;
      const double centre = h.lr_min + static_cast<double>(bin) / kBinsPerUnit;
      const double series =
          cell[0] - beta * cell[1] + beta * beta * cell[2] / 2.0 - beta * beta * beta * cell[3] / 6.0;
      s.add(std::exp(-beta * centre) * series);
    }
    if (m < nl) {
      running += s.value();
      r.partial_sums.push_back(running);
    } else {
      r.total = running + s.value();
    }
  }
  r.verdict = energy_verdict(r.partial_sums, options.converging_ratio, options.diverging_ratio,
                             &r.growth_ratio);
  return r;
}

std::vector<EnergyReport> average_reports(const std::vector<std::vector<EnergyReport>>& per,
                                          const EnergyOptions& options) {
  std::vector<EnergyReport> out = per.front();
  const double nf = static_cast<double>(per.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    auto& r = out[b];
    for (std::size_t l = 0; l < r.partial_sums.size(); ++l) {
      stats::CompensatedSum s;
      for (const auto& p : per) s.add(p[b].partial_sums[l]);
      r.partial_sums[l] = s.value() / nf;
    }
    stats::CompensatedSum tot;
    for (const auto& p : per) tot.add(p[b].total);
    r.total = tot.value() / nf;
    r.verdict = energy_verdict(r.partial_sums, options.converging_ratio, options.diverging_ratio,
                               &r.growth_ratio);
  }
  return out;
}

std::vector<EnergyReport> family_sweep(std::span<const DiscreteMeasure> family, EnergyKernel kernel,
                                       std::span<const double> betas, const EnergyOptions& options) {
  std::vector<std::vector<EnergyReport>> per;
  for (std::size_t m = 0; m < family.size(); ++m) {
    EnergyOptions o = options;
    o.seed = mix_seed(options.seed, m);
    per.push_back(energy_sweep(family[m], kernel, betas, o));
  }
  return average_reports(per, options);
}

}  // namespace

ThresholdResult capacity_threshold(std::span<const DiscreteMeasure> family, EnergyKernel kernel,
                                   std::span<const double> beta_grid, const EnergyOptions& options,
                                   double resolution) {
  if (family.empty()) throw InsufficientDataError("capacity threshold needs at least one measure");
  if (beta_grid.size() < 5) throw ParameterError("capacity threshold needs at least 5 grid values");
  if (!std::is_sorted(beta_grid.begin(), beta_grid.end())) throw ParameterError("beta grid must be sorted");
  if (!(resolution > 0.0)) throw ParameterError("bisection resolution must be positive");

  std::vector<LagHistogram> hists;
  if (kernel == EnergyKernel::euclidean_beta) {
    for (const auto& mu : family) {
      if (mu.size() < 2) throw InsufficientDataError("energy needs at least 2 atoms");
      std::vector<int> levels = options.levels.empty() ? default_energy_levels(mu.size()) : options.levels;
      if (levels.size() < 3) throw InsufficientDataError("energy needs at least 3 mesh levels");
      if (!std::is_sorted(levels.begin(), levels.end())) throw ParameterError("mesh levels must be sorted");
      hists.push_back(build_histogram(mu, levels, options.threads));
    }
  }
  auto sweep = [&](std::span<const double> betas) {
    if (hists.empty()) return family_sweep(family, kernel, betas, options);
    std::vector<std::vector<EnergyReport>> per;
    for (const auto& h : hists) {
      std::vector<EnergyReport> reports;
      for (double b : betas) reports.push_back(histogram_energy(h, b, options));
      per.push_back(std::move(reports));
    }
    return average_reports(per, options);
  };

  ThresholdResult res;
  res.grid.assign(beta_grid.begin(), beta_grid.end());
  for (double b : beta_grid) {
    if (!(b >= 0.0)) throw ParameterError("energy exponent must be >= 0");
  }
  res.reports = sweep(beta_grid);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    res.grid_verdicts.push_back(res.reports[i].verdict);
    if (res.reports[i].verdict == Verdict::converging) best = i;
  }
  if (!best) {
    res.message = "no grid value converges; extend the grid towards smaller beta";
    return res;
  }
  if (*best + 1 == beta_grid.size()) {
    res.message = "every grid value up to the largest converges; extend the grid towards larger beta";
    return res;
  }
  double lo = beta_grid[*best];
  double hi = beta_grid[*best + 1];
  while (hi - lo > resolution) {
    const double mid[] = {0.5 * (lo + hi)};
    auto r = sweep(mid).front();
    res.bisection.emplace_back(mid[0], r.verdict);
    if (r.verdict == Verdict::converging) {
      lo = mid[0];
    } else {
      hi = mid[0];
    }
    res.reports.push_back(std::move(r));
  }
  res.beta_star = lo;
  return res;
}

}  // namespace parafrac

#include "parafrac/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "parafrac/errors.hpp"

namespace parafrac::stats {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientDataError("least_squares needs at least two (x, y) pairs of equal length");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("least_squares: regressor has zero variance");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  CompensatedSum s;
  for (double v : values) s.add(v);
  const auto n = static_cast<double>(values.size());
  out.mean = s.value() / n;
  if (values.size() > 1) {
    CompensatedSum ss;
    for (double v : values) ss.add((v - out.mean) * (v - out.mean));
    out.std_error = std::sqrt(ss.value() / (n - 1.0) / n);
  }
  return out;
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    carry_ += (sum_ - t) + v;
  } else {
    carry_ += (v - t) + sum_;
  }
  sum_ = t;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientDataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Smallest lambda with kolmogorov_survival(lambda) <= level.
double kolmogorov_critical(double level) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_survival(mid) > level) lo = mid; else hi = mid;
  }
  return hi;
}

KsResult finish(double d, double n_eff, double level) {
  KsResult r;
  r.statistic = d;
  const double sq = std::sqrt(n_eff);
  // Stephens' small-sample correction of the asymptotic law.
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical = kolmogorov_critical(level) / (sq + 0.12 + 0.11 / sq);
  r.reject = d > r.critical;
  return r;
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
  if (a.empty() || b.empty()) throw InsufficientDataError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return finish(d, na * nb / (na + nb), level);
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf,
                       double level) {
  if (a.empty()) throw InsufficientDataError("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const auto n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return finish(d, n, level);
}

double chi_square_survival(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace parafrac::stats

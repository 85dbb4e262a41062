#include "parafrac/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parafrac/errors.hpp"

namespace parafrac {

double TimeSet::resolution() const {
  if (kind == TimeSetKind::interval) return t_max * std::ldexp(1.0, -level);
  return t_max * std::pow(ratio, level);
}

TimeSet build_time_set(TimeSetKind kind, int level, double ratio, double t_max) {
  if (level < 0 || level > 30) throw ParameterError("time set level must lie in [0, 30]");
  if (!(t_max > 0.0)) throw ParameterError("time set horizon must be positive");
  TimeSet ts;
  ts.kind = kind;
  ts.level = level;
  ts.t_max = t_max;
  const std::size_t n = std::size_t{1} << level;
  if (kind == TimeSetKind::interval) {
    ts.ratio = 0.5;
    ts.known_dim = 1.0;
    ts.points.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      ts.points[i] = t_max * static_cast<double>(i) / static_cast<double>(n);
    }
    return ts;
  }
  if (!(ratio > 0.0 && ratio <= 0.5)) throw ParameterError("cantor ratio must lie in (0, 1/2]");
  ts.ratio = ratio;
  ts.known_dim = std::log(2.0) / std::log(1.0 / ratio);
  // Left endpoint of word b_1..b_n is sum_i b_i (1 - r) r^(i-1); index bits
  // are read most significant first so the points come out sorted.
  std::vector<double> offsets(static_cast<std::size_t>(level));
  double scale = 1.0;
  for (int i = 0; i < level; ++i) {
    offsets[static_cast<std::size_t>(i)] = (1.0 - ratio) * scale;
    scale *= ratio;
  }
  ts.points.resize(n);
  for (std::size_t w = 0; w < n; ++w) {
    double t = 0.0;
    for (int i = 0; i < level; ++i) {
      if ((w >> (level - 1 - i)) & 1U) t += offsets[static_cast<std::size_t>(i)];
    }
    ts.points[w] = t_max * t;
  }
  return ts;
}

DriftSpec DriftSpec::zero(int d, double t_max) {
  if (d < 1) throw ParameterError("drift dimension must be >= 1");
  DriftSpec f;
  f.kind = DriftKind::zero;
  f.d = d;
  f.t_max = t_max;
  f.holder_beta = 1.0;
  return f;
}

DriftSpec DriftSpec::constant_vector(std::vector<double> c, double t_max) {
  if (c.empty()) throw ParameterError("constant drift needs at least one coordinate");
  DriftSpec f;
  f.kind = DriftKind::constant;
  f.d = static_cast<int>(c.size());
  f.t_max = t_max;
  f.constant = std::move(c);
  f.holder_beta = 1.0;
  return f;
}

DriftSpec DriftSpec::power(double beta, int d) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("power exponent must lie in (0, 1]");
  if (d < 1) throw ParameterError("drift dimension must be >= 1");
  DriftSpec f;
  f.kind = DriftKind::power;
  f.d = d;
  f.beta = beta;
  f.holder_beta = beta;
  return f;
}

DriftSpec DriftSpec::weierstrass(double base, double beta, int d, double t_max) {
  if (!(base > 1.0)) throw ParameterError("weierstrass base must exceed 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("weierstrass exponent must lie in (0, 1)");
  if (d < 1) throw ParameterError("drift dimension must be >= 1");
  DriftSpec f;
  f.kind = DriftKind::weierstrass;
  f.d = d;
  f.t_max = t_max;
  f.beta = beta;
  f.base = base;
  f.terms = static_cast<int>(std::floor(12.0 * std::log(10.0) / (beta * std::log(base)))) + 1;
  f.holder_beta = beta;
  return f;
}

DriftSpec DriftSpec::sampled_path(PathSample sample) {
  DriftSpec f;
  f.kind = DriftKind::sampled_path;
  f.d = sample.params.d;
  f.t_max = sample.grid.t_max();
  f.path = std::make_shared<const PathSample>(std::move(sample));
  return f;
}

void eval_drift(const DriftSpec& f, double t, std::span<double> out) {
  if (!(t >= 0.0 && t <= f.t_max)) throw ParameterError("drift evaluated outside [0, t_max]");
  double v = 0.0;
  switch (f.kind) {
    case DriftKind::zero:
      break;
    case DriftKind::constant:
      std::copy(f.constant.begin(), f.constant.end(), out.begin());
      return;
    case DriftKind::power:
      v = std::pow(t, f.beta);
      break;
    case DriftKind::weierstrass: {
      for (int k = 0; k < f.terms; ++k) {
        v += std::pow(f.base, -k * f.beta) * std::cos(std::pow(f.base, k) * t);
      }
      break;
    }
    case DriftKind::sampled_path: {
      const auto& pts = f.path->grid.points();
      const auto it = std::upper_bound(pts.begin(), pts.end(), t);
      const auto i = static_cast<std::size_t>(it - pts.begin()) - 1;
      const auto row = f.path->position(i);
      std::copy(row.begin(), row.end(), out.begin());
      return;
    }
  }
  std::fill(out.begin(), out.end(), v);
}

std::vector<double> eval_drift(const DriftSpec& f, double t) {
  std::vector<double> out(static_cast<std::size_t>(f.d));
  eval_drift(f, t, out);
  return out;
}

HolderCertificate holder_certificate(const DriftSpec& f, double beta, std::size_t n_pairs,
                                     std::uint64_t seed) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("holder exponent must lie in (0, 1]");
  if (n_pairs == 0) throw ParameterError("holder certificate needs at least one pair");
  constexpr double kStep = 0.01;
  const auto top = static_cast<std::size_t>(std::ceil(beta / kStep - 1e-9));
  std::vector<double> grid;
  for (std::size_t j = 1; j <= top; ++j) grid.push_back(static_cast<double>(j) * kStep);

  Stream rng(seed, 0);
  const auto d = static_cast<std::size_t>(f.d);
  std::vector<double> a(d), b(d);
  // Maxima of log ratios; -inf stands for a zero increment.
  const double none = -std::numeric_limits<double>::infinity();
  double at_beta = none;
  double at_beta_coarse = none;
  std::vector<double> coarse(grid.size(), none);
  std::vector<double> refined(grid.size(), none);
  for (std::size_t p = 0; p < 10 * n_pairs; ++p) {
    const double s = f.t_max * rng.uniform();
    const double t = f.t_max * rng.uniform();
    if (s != t) {
      eval_drift(f, s, a);
      eval_drift(f, t, b);
      double sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
      const double log_inc = 0.5 * std::log(sq);
      const double log_gap = std::log(std::abs(t - s));
      at_beta = std::max(at_beta, log_inc - beta * log_gap);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        refined[g] = std::max(refined[g], log_inc - grid[g] * log_gap);
      }
    }
    if (p + 1 == n_pairs) {
      at_beta_coarse = at_beta;
      coarse = refined;
    }
  }
  const auto stable = [](double lc, double lr) {
    return std::isfinite(std::exp(lc)) && std::isfinite(std::exp(lr)) && std::exp(lr) <= 1.1 * std::exp(lc);
  };
  HolderCertificate cert;
  cert.constant = std::exp(at_beta_coarse);
  cert.refined_constant = std::exp(at_beta);
  cert.pass = true;
  for (std::size_t g = 0; g < grid.size(); ++g) cert.pass = cert.pass && stable(coarse[g], refined[g]);
  return cert;
}

std::size_t clip_to_half_ball(std::span<double> rows, int d) {
  const auto du = static_cast<std::size_t>(d);
  const std::size_t n = rows.size() / du;
  if (n == 0) return 0;
  std::vector<double> lo(du, std::numeric_limits<double>::infinity());
  std::vector<double> hi(du, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < du; ++j) {
      lo[j] = std::min(lo[j], rows[i * du + j]);
      hi[j] = std::max(hi[j], rows[i * du + j]);
    }
  }
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < du; ++j) {
      rows[i * du + j] -= 0.5 * (lo[j] + hi[j]);
      sq += rows[i * du + j] * rows[i * du + j];
    }
    const double norm = std::sqrt(sq);
    if (norm > 0.5) {
      for (std::size_t j = 0; j < du; ++j) rows[i * du + j] *= 0.5 / norm;
      ++clipped;
    }
  }
  return clipped;
}

}  // namespace parafrac

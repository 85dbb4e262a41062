#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace parafrac::stats {

/// Ordinary least squares fit y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // zero for an exact fit or two points
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStderr mean_stderr(std::span<const double> values);

/// Neumaier-compensated sum; order-dependent only in the last bits.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Empirical quantile with linear interpolation (type 7). Sorts a copy.
double quantile(std::vector<double> values, double q);

/// Kolmogorov distribution survival P(K > lambda).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;    // asymptotic
  double critical = 0.0;   // critical value of the statistic at the requested level
  bool reject = false;
};

/// Two-sample Kolmogorov-Smirnov test at significance `level`.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.01);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf,
                       double level = 0.01);

/// Upper tail P(chi^2_dof > x).
double chi_square_survival(double x, double dof);

}  // namespace parafrac::stats

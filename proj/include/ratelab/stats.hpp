#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ratelab {

// ---------------------------------------------------------------------------
// Small numerical helpers shared across modules. Nothing here owns state.
// ---------------------------------------------------------------------------

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

// Acklam-style rational approximation refined by one Halley step; accurate to
// ~1e-15 over (0,1), which is more than the Monte Carlo layers need.
double normal_quantile(double p);

inline double sqr(double x) { return x * x; }

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("variance: need at least 2 points");
  double m = mean(v), s = 0.0;
  for (double x : v) s += sqr(x - m);
  return s / static_cast<double>(v.size() - 1);
}

// q-quantile with linear interpolation between order statistics.
double quantile(std::vector<double> v, double q);

// Quantile of a discrete distribution given (value, weight) pairs; weights
// need not be normalized. Returns the smallest value whose cumulative
// normalized weight reaches q.
double weighted_quantile(std::vector<std::pair<double, double>> vw, double q);

// log(sum(exp(x_i))) without overflow.
double log_sum_exp(const std::vector<double>& x);

// Tail sum of the power series: sum_{i > m} i^{-s} for s > 1, via
// Euler-Maclaurin. Accurate to ~1e-13 for m >= 8.
double power_tail(double s, std::size_t m);

// Simple ordinary least squares y ~ a + b x (+ c w if w given).
struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double extra = 0.0;       // coefficient on the optional second regressor
  double residual_rms = 0.0;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>* w = nullptr);

}  // namespace ratelab

#include "ratelab/stats.hpp"

#include <cmath>

namespace ratelab {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  // Acklam's approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // One Halley refinement against the exact cdf.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  x = x - u / (1 + x * u / 2);
  return x;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

double weighted_quantile(std::vector<std::pair<double, double>> vw, double q) {
  if (vw.empty()) throw std::invalid_argument("weighted_quantile: empty sample");
  double total = 0.0;
  for (auto& [v, w] : vw) {
    if (w < 0.0) throw std::invalid_argument("weighted_quantile: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("weighted_quantile: zero total weight");
  std::sort(vw.begin(), vw.end());
  double acc = 0.0;
  for (auto& [v, w] : vw) {
    acc += w;
    if (acc >= q * total) return v;
  }
  return vw.back().first;
}

double log_sum_exp(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double power_tail(double s, std::size_t m) {
  if (s <= 1.0) throw std::invalid_argument("power_tail: requires s > 1");
  // Sum a handful of terms explicitly, then Euler-Maclaurin from m' >= m+8.
  std::size_t mp = m;
  double head = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    ++mp;
    head += std::pow(static_cast<double>(mp), -s);
  }
  double x = static_cast<double>(mp);
  // integral_{mp}^inf t^-s dt + 1/2 mp^-s corrections (head already holds mp term)
  double tail = std::pow(x, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(x, -s) +
                s * std::pow(x, -s - 1.0) / 12.0 -
                s * (s + 1.0) * (s + 2.0) * std::pow(x, -s - 3.0) / 720.0 +
                s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) *
                    std::pow(x, -s - 5.0) / 30240.0;
  return head + tail;
}

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>* w) {
  const std::size_t n = x.size();
  if (y.size() != n || (w && w->size() != n)) throw std::invalid_argument("ols: size mismatch");
  const std::size_t p = w ? 3 : 2;
  if (n < p) throw std::invalid_argument("ols: not enough points");
  // Normal equations on the (1, x [, w]) design; 3x3 at most, solve directly.
  double XtX[3][3] = {{0}};
  double Xty[3] = {0};
  for (std::size_t i = 0; i < n; ++i) {
    double row[3] = {1.0, x[i], w ? (*w)[i] : 0.0};
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) XtX[r][c] += row[r] * row[c];
      Xty[r] += row[r] * y[i];
    }
  }
  // Gaussian elimination with partial pivoting.
  double A[3][4];
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) A[r][c] = XtX[r][c];
    A[r][p] = Xty[r];
  }
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < p; ++r)
      if (std::fabs(A[r][k]) > std::fabs(A[piv][k])) piv = r;
    if (std::fabs(A[piv][k]) < 1e-12) throw std::runtime_error("ols: singular design");
    if (piv != k)
      for (std::size_t c = 0; c <= p; ++c) std::swap(A[piv][c], A[k][c]);
    for (std::size_t r = k + 1; r < p; ++r) {
      double f = A[r][k] / A[k][k];
      for (std::size_t c = k; c <= p; ++c) A[r][c] -= f * A[k][c];
    }
  }
  double beta[3] = {0, 0, 0};
  for (std::size_t k = p; k-- > 0;) {
    double s = A[k][p];
    for (std::size_t c = k + 1; c < p; ++c) s -= A[k][c] * beta[c];
    beta[k] = s / A[k][k];
  }
  OlsFit fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  fit.extra = beta[2];
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = beta[0] + beta[1] * x[i] + (w ? beta[2] * (*w)[i] : 0.0);
    rss += sqr(y[i] - pred);
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
  return fit;
}

}  // namespace ratelab

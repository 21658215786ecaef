#pragma once

// Numerical oracles used only by the tests. They re-derive quantities from
// first principles with methods distinct from the library's own backends
// (composite Simpson instead of trapezoid, direct series summation, explicit
// enumeration), so agreement is evidence and not tautology.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Composite Simpson rule with panels forced even.
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      std::size_t panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / static_cast<double>(panels);
  double s = f(lo) + f(hi);
  for (std::size_t i = 1; i < panels; ++i)
    s += f(lo + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_logpdf(double x, double mu, double var) {
  static const double log2pi = 1.8378770664093454836;
  const double d = x - mu;
  return -0.5 * (log2pi + std::log(var) + d * d / var);
}

inline double poisson_logpmf(unsigned x, double lambda) {
  return -lambda + static_cast<double>(x) * std::log(lambda) - std::lgamma(x + 1.0);
}

// Integral of p * w(log p, log q) for two normal densities, Simpson on a
// 14-sigma range.
inline double normal_expectation(double mu1, double v1, double mu2, double v2,
                                 const std::function<double(double, double)>& w,
                                 std::size_t panels = 40000) {
  const double sd = std::sqrt(std::max(v1, v2));
  const double lo = std::min(mu1, mu2) - 14.0 * sd;
  const double hi = std::max(mu1, mu2) + 14.0 * sd;
  auto f = [&](double x) {
    const double lp = normal_logpdf(x, mu1, v1);
    return std::exp(lp) * w(lp, normal_logpdf(x, mu2, v2));
  };
  return simpson(f, lo, hi, panels);
}

// Sum of p * w(log p, log q) for two Poisson pmfs, summed until both tails
// are negligible.
inline double poisson_expectation(double l1, double l2,
                                  const std::function<double(double, double)>& w) {
  const double lmax = std::max(l1, l2);
  const unsigned cut = static_cast<unsigned>(lmax + 15.0 * std::sqrt(lmax) + 40.0);
  double s = 0.0;
  for (unsigned x = 0; x <= cut; ++x)
    s += std::exp(poisson_logpmf(x, l1)) * w(poisson_logpmf(x, l1), poisson_logpmf(x, l2));
  return s;
}

inline double bernoulli_expectation(double p1, double p2,
                                    const std::function<double(double, double)>& w) {
  double s = 0.0;
  if (p1 > 0.0) s += p1 * w(std::log(p1), p2 > 0.0 ? std::log(p2) : -1e308);
  if (p1 < 1.0) s += (1.0 - p1) * w(std::log1p(-p1), p2 < 1.0 ? std::log1p(-p2) : -1e308);
  return s;
}

// Defining integrals of the divergences, for any expectation backend
// E[w(log p, log q)] under p.
using Expect = std::function<double(const std::function<double(double, double)>&)>;

inline double hellinger_sq_from(const Expect& e) {
  // integral (sqrt p - sqrt q)^2 = 2 - 2 integral p * exp((log q - log p)/2)
  return 2.0 - 2.0 * e([](double lp, double lq) { return std::exp(0.5 * (lq - lp)); });
}

inline double kl_from(const Expect& e) {
  return e([](double lp, double lq) { return lp - lq; });
}

inline double vk0_from(const Expect& e, int k) {
  const double m = kl_from(e);
  return e([m, k](double lp, double lq) { return std::pow(std::fabs(lp - lq - m), k); });
}

inline double vk_from(const Expect& e, int k) {
  return e([k](double lp, double lq) { return std::pow(std::fabs(lp - lq), k); });
}

// Mean and 4-SE half-width of a sample.
struct McMoments {
  double mean = 0.0;
  double se = 0.0;          // standard error of the mean
  double var = 0.0;         // sample variance
  double var_se = 0.0;      // approximate SE of the sample variance
};

inline McMoments mc_moments(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("mc_moments: need two points");
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double s2 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    s2 += d;
    s4 += d * d;
  }
  s2 /= (n - 1.0);
  const double m4 = s4 / n;
  McMoments out;
  out.mean = m;
  out.var = s2;
  out.se = std::sqrt(s2 / n);
  out.var_se = std::sqrt(std::max(0.0, m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n);
  return out;
}

// Greedy is compared against brute force where feasible: minimal number of
// eps-balls (closed, centers among the points) covering all points.
inline std::size_t brute_force_min_cover(const std::vector<std::vector<double>>& pts,
                                         double eps) {
  const std::size_t n = pts.size();
  if (n == 0 || n > 20) throw std::invalid_argument("brute_force_min_cover: need 1..20 points");
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < pts[i].size(); ++d) {
      const double v = pts[i][d] - pts[j][d];
      s += v * v;
    }
    return std::sqrt(s);
  };
  std::vector<unsigned> covers(n, 0);  // bitmask of points within eps of center i
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist(i, j) <= eps) covers[i] |= 1u << j;
  const unsigned full = (n == 20) ? 0xFFFFFu : ((1u << n) - 1u);
  for (std::size_t k = 1; k <= n; ++k) {
    // try all k-subsets of centers
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      unsigned u = 0;
      for (std::size_t i : idx) u |= covers[i];
      if (u == full) return k;
      // next combination
      std::size_t pos = k;
      while (pos > 0) {
        --pos;
        if (idx[pos] != n - k + pos) break;
      }
      if (idx[pos] == n - k + pos) break;
      ++idx[pos];
      for (std::size_t i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return n;
}

}  // namespace oracle

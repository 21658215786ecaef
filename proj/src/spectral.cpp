#include "ratelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ratelab/stats.hpp"

namespace ratelab::spectral {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double SpectralDensity::eval(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const std::size_t P = panels();
  const double t = u * static_cast<double>(P);
  std::size_t i = std::min(static_cast<std::size_t>(t), P - 1);
  const double frac = t - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

double SpectralDensity::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double SpectralDensity::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

void SpectralDensity::validate() const {
  if (values.size() < 2) throw std::invalid_argument("spectral density: need >= 2 grid points");
  for (double v : values)
    if (!(v > 0) || !std::isfinite(v))
      throw std::invalid_argument("spectral density: values must be positive and finite");
}

SpectralDensity SpectralDensity::constant(double c, std::size_t points) {
  SpectralDensity f;
  f.values.assign(points, c);
  f.validate();
  return f;
}

SpectralDensity SpectralDensity::from_function(const std::function<double(double)>& f01,
                                               std::size_t points) {
  SpectralDensity f;
  f.values.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    f.values[i] = f01(static_cast<double>(i) / static_cast<double>(points - 1));
  f.validate();
  return f;
}

SpectralDensity SpectralDensity::from_tabulated(const TabulatedFn& fn) {
  // tabulated draws use a uniform grid on [0,1]; only the ordinates are kept
  SpectralDensity f;
  f.values = fn.ys;
  f.validate();
  return f;
}

double autocovariance(const SpectralDensity& f, long h) {
  f.validate();
  const std::size_t P = f.panels();
  const std::size_t ah = static_cast<std::size_t>(h < 0 ? -h : h);
  if (ah > P / 4)
    throw std::invalid_argument("autocovariance: lag beyond the tabulation's aliasing guard");
  const double w = std::numbers::pi * static_cast<double>(ah);
  double s = 0.0;
  for (std::size_t i = 0; i <= P; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(P);
    const double g = std::cos(w * u) * f.values[i];
    s += (i == 0 || i == P) ? 0.5 * g : g;
  }
  return kTwoPi * s / static_cast<double>(P);
}

std::vector<double> autocovariances_exact(const SpectralDensity& f, std::size_t count) {
  f.validate();
  const std::size_t P = f.panels();
  const double du = 1.0 / static_cast<double>(P);
  std::vector<double> gamma(count, 0.0);
  if (count == 0) return gamma;
  {
    double s = 0.0;
    for (std::size_t i = 0; i < P; ++i) s += 0.5 * (f.values[i] + f.values[i + 1]);
    gamma[0] = kTwoPi * s * du;
  }
  // per panel with y linear: int y cos(wu) du =
  //   (y1 sin(w u1) - y0 sin(w u0))/w + slope (cos(w u1) - cos(w u0))/w^2
  for (std::size_t h = 1; h < count; ++h) {
    const double w = std::numbers::pi * static_cast<double>(h);
    double acc = 0.0;
    double s0 = 0.0, c0 = 1.0;  // sin/cos at u = 0
    for (std::size_t i = 0; i < P; ++i) {
      const double u1 = static_cast<double>(i + 1) * du;
      const double s1 = std::sin(w * u1), c1 = std::cos(w * u1);
      const double slope = (f.values[i + 1] - f.values[i]) / du;
      acc += (f.values[i + 1] * s1 - f.values[i] * s0) / w + slope * (c1 - c0) / (w * w);
      s0 = s1;
      c0 = c1;
    }
    gamma[h] = kTwoPi * acc;
  }
  return gamma;
}

Eigen::MatrixXd toeplitz(const SpectralDensity& f, std::size_t n) {
  if (n == 0) throw std::invalid_argument("toeplitz: n must be positive");
  std::vector<double> gamma(n);
  for (std::size_t h = 0; h < n; ++h) gamma[h] = autocovariance(f, static_cast<long>(h));
  Eigen::MatrixXd T(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) T(i, j) = gamma[i >= j ? i - j : j - i];
  return T;
}

double toeplitz_frobenius_sq(const std::vector<double>& gamma, std::size_t n) {
  if (gamma.size() < n) throw std::invalid_argument("toeplitz_frobenius_sq: need n lags");
  double s = static_cast<double>(n) * gamma[0] * gamma[0];
  for (std::size_t h = 1; h < n; ++h)
    s += 2.0 * static_cast<double>(n - h) * gamma[h] * gamma[h];
  return s;
}

double l2_distance_sq(const SpectralDensity& f, const SpectralDensity& g) {
  const std::size_t pts = std::max({f.values.size(), g.values.size(),
                                    SpectralDensity::kDefaultPoints});
  double s = 0.0;
  for (std::size_t i = 0; i < pts; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(pts - 1);
    const double d = f.eval(u) - g.eval(u);
    const double w = (i == 0 || i == pts - 1) ? 0.5 : 1.0;
    s += w * d * d;
  }
  return kTwoPi * s / static_cast<double>(pts - 1);
}

namespace {

double logdet_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto& L = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

}  // namespace

LoglikMoments gaussian_ts_loglik_moments(const SpectralDensity& f, const SpectralDensity& g,
                                         std::size_t n) {
  const Eigen::MatrixXd F = toeplitz(f, n);
  const Eigen::MatrixXd G = toeplitz(g, n);
  Eigen::LLT<Eigen::MatrixXd> lltF(F), lltG(G);
  if (lltF.info() != Eigen::Success || lltG.info() != Eigen::Success)
    throw std::runtime_error("gaussian_ts_loglik_moments: covariance not positive definite");

  const Eigen::MatrixXd M = G - F;
  // logdet(I + G^{-1/2}(F-G)G^{-1/2}) = logdet(F) - logdet(G)
  const double mean = -0.5 * (logdet_llt(lltF) - logdet_llt(lltG)) - 0.5 * lltG.solve(M).trace();

  const Eigen::MatrixXd U = lltG.solve(M);  // G^{-1} M
  const double t1 = U.cwiseProduct(U.transpose()).sum();
  // tr(M G^{-1} F G^{-1} M F^{-1}) = tr(U^T (F U) F^{-1})
  const Eigen::MatrixXd R = lltF.solve((F * U).transpose()).transpose();  // (F U) F^{-1}
  const double t2 = U.cwiseProduct(R).sum();
  return {mean, 0.25 * (t1 + t2)};
}

std::vector<double> periodogram(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (n < 4) throw std::invalid_argument("periodogram: need n >= 4");
  const std::size_t nu = n / 2;
  std::vector<double> c(n), s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    c[k] = std::cos(a);
    s[k] = std::sin(a);
  }
  std::vector<double> I(nu);
  for (std::size_t j = 1; j <= nu; ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t k = (j * t) % n;
      re += x[t] * c[k];
      im -= x[t] * s[k];
    }
    I[j - 1] = (re * re + im * im) / (kTwoPi * static_cast<double>(n));
  }
  return I;
}

double parseval_gap(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) throw std::invalid_argument("parseval_gap: need n >= 4");
  std::vector<double> c(n), s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    c[k] = std::cos(a);
    s[k] = std::sin(a);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t k = (j * t) % n;
      re += x[t] * c[k];
      im -= x[t] * s[k];
    }
    total += (re * re + im * im) / (kTwoPi * static_cast<double>(n));
  }
  double ssq = 0.0;
  for (double v : x) ssq += v * v;
  return std::abs(kTwoPi * total - ssq) / std::max(1.0, ssq);
}

double whittle_loglik(const SpectralDensity& f, const std::vector<double>& ordinates,
                      std::size_t n) {
  double ll = 0.0;
  for (std::size_t j = 1; j <= ordinates.size(); ++j) {
    const double u = 2.0 * static_cast<double>(j) / static_cast<double>(n);
    const double fv = f.eval(u);
    if (!(fv > 0)) throw std::invalid_argument("whittle_loglik: density not positive");
    ll += -std::log(fv) - ordinates[j - 1] / fv;
  }
  return ll;
}

double dbar_distance(const SpectralDensity& f1, const SpectralDensity& f2, std::size_t n) {
  const std::size_t nu = n / 2;
  if (nu == 0) throw std::invalid_argument("dbar_distance: need n >= 2");
  double s = 0.0;
  for (std::size_t i = 1; i <= nu; ++i) {
    const double u = 2.0 * static_cast<double>(i) / static_cast<double>(n);
    const double d = f1.eval(u) - f2.eval(u);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(nu));
}

double exponential_dn(const SpectralDensity& f1, const SpectralDensity& f2, std::size_t n) {
  const std::size_t nu = n / 2;
  if (nu == 0) throw std::invalid_argument("exponential_dn: need n >= 2");
  double s = 0.0;
  for (std::size_t i = 1; i <= nu; ++i) {
    const double u = 2.0 * static_cast<double>(i) / static_cast<double>(n);
    const double a = f1.eval(u), b = f2.eval(u);
    const double r = std::sqrt(a) - std::sqrt(b);
    s += 2.0 * r * r / (a + b);  // squared Hellinger between Exp means a, b
  }
  return std::sqrt(s / static_cast<double>(nu));
}

std::vector<double> simulate_gaussian_ts(const SpectralDensity& f, std::size_t n,
                                         std::mt19937_64& eng) {
  return simulate_gaussian_ts(autocovariances_exact(f, n), n, eng);
}

std::vector<double> simulate_gaussian_ts(const std::vector<double>& gamma, std::size_t n,
                                         std::mt19937_64& eng) {
  if (gamma.size() < n || n == 0)
    throw std::invalid_argument("simulate_gaussian_ts: need n autocovariances");
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(n);
  if (!(gamma[0] > 0)) throw std::runtime_error("simulate_gaussian_ts: gamma_0 must be positive");
  double v = gamma[0];
  x[0] = std::sqrt(v) * nd(eng);
  std::vector<double> phi, phi_prev;
  for (std::size_t m = 1; m < n; ++m) {
    double acc = gamma[m];
    for (std::size_t j = 1; j < m; ++j) acc -= phi_prev[j - 1] * gamma[m - j];
    const double k = acc / v;
    if (!(std::abs(k) < 1.0))
      throw std::runtime_error("simulate_gaussian_ts: factorization failed (not positive definite)");
    phi.assign(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) phi[j - 1] = phi_prev[j - 1] - k * phi_prev[m - 1 - j];
    phi[m - 1] = k;
    v *= 1.0 - k * k;
    double pred = 0.0;
    for (std::size_t j = 1; j <= m; ++j) pred += phi[j - 1] * x[m - j];
    x[m] = pred + std::sqrt(v) * nd(eng);
    std::swap(phi, phi_prev);
  }
  return x;
}

WhittleSummary whittle_posterior_is(const std::vector<double>& x,
                                    const BernsteinDirichletPrior& prior,
                                    const SpectralDensity& f0, std::size_t S, double quantile,
                                    double eps_ref, std::mt19937_64& eng) {
  if (S == 0) throw std::invalid_argument("whittle_posterior_is: need draws");
  const std::size_t n = x.size();
  const std::vector<double> I = periodogram(x);
  const std::size_t nu = I.size();
  const std::size_t j_mid = nu == 0 ? 0 : std::max<std::size_t>(1, nu / 2);
  const double u_mid =
      nu == 0 ? 0.5 : 2.0 * static_cast<double>(j_mid) / static_cast<double>(n);

  std::vector<double> f0v(nu);
  for (std::size_t j = 1; j <= nu; ++j)
    f0v[j - 1] = f0.eval(2.0 * static_cast<double>(j) / static_cast<double>(n));

  std::vector<double> logw(S), dist(S), mid(S);
  for (std::size_t s = 0; s < S; ++s) {
    const BernsteinDraw draw = sample_bernstein_density(prior, eng);
    const SpectralDensity fs = SpectralDensity::from_tabulated(draw.fn);
    double ll = 0.0, d2 = 0.0;
    for (std::size_t j = 1; j <= nu; ++j) {
      const double u = 2.0 * static_cast<double>(j) / static_cast<double>(n);
      const double fv = fs.eval(u);
      ll += -std::log(fv) - I[j - 1] / fv;
      const double d = fv - f0v[j - 1];
      d2 += d * d;
    }
    logw[s] = ll;
    dist[s] = nu == 0 ? 0.0 : std::sqrt(d2 / static_cast<double>(nu));
    mid[s] = fs.eval(u_mid);
  }
  const double lse = log_sum_exp(logw);
  std::vector<std::pair<double, double>> items(S);
  double sw = 0.0, sw2 = 0.0, mean_mid = 0.0, m2 = 0.0, m5 = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double w = std::exp(logw[s] - lse);
    items[s] = {dist[s], w};
    sw += w;
    sw2 += w * w;
    mean_mid += w * mid[s];
    if (dist[s] > 2.0 * eps_ref) m2 += w;
    if (dist[s] > 5.0 * eps_ref) m5 += w;
  }
  WhittleSummary out;
  out.draws = S;
  out.ess = sw * sw / sw2;
  out.ess_low = out.ess < 50.0;
  out.radius = weighted_quantile(items, quantile);
  out.mass_outside_2 = m2 / sw;
  out.mass_outside_5 = m5 / sw;
  out.mean_mid = mean_mid / sw;
  out.f0_mid = f0.eval(u_mid);
  return out;
}

}  // namespace ratelab::spectral

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ratelab/priors.hpp"

namespace ratelab::spectral {

// Spectral density tabulated on a uniform grid over the rescaled domain [0,1]
// (the original domain (-pi, pi] folded by symmetry, lambda = pi * u). All
// quadrature is trapezoid on the tabulation grid.
struct SpectralDensity {
  std::vector<double> values;  // f at u_i = i / (values.size() - 1)

  static constexpr std::size_t kDefaultPoints = 1025;  // 1024 panels

  std::size_t panels() const { return values.size() - 1; }
  double eval(double u) const;  // linear interpolation, u clamped to [0,1]
  double min_value() const;
  double max_value() const;
  void validate() const;  // at least 2 points, all positive

  static SpectralDensity constant(double c, std::size_t points = kDefaultPoints);
  static SpectralDensity from_function(const std::function<double(double)>& f01,
                                       std::size_t points = kDefaultPoints);
  static SpectralDensity from_tabulated(const TabulatedFn& fn);
};

// gamma_h = integral of e^{i h lambda} f over (-pi, pi] = 2 pi * int_0^1
// cos(h pi u) f(u) du, by trapezoid. The tabulation resolves the oscillation
// only while |h| <= panels/4; larger lags are rejected.
double autocovariance(const SpectralDensity& f, long h);

// First `count` autocovariances of the piecewise-linear interpolant, by the
// closed-form Fourier coefficient of each linear panel. Exact for the
// tabulated function at every lag (no aliasing guard needed), so safe for the
// long lag sequences the simulator consumes.
std::vector<double> autocovariances_exact(const SpectralDensity& f, std::size_t count);

Eigen::MatrixXd toeplitz(const SpectralDensity& f, std::size_t n);

// Frobenius identity reference: sum_{|h|<n} (n-|h|) gamma_h^2.
double toeplitz_frobenius_sq(const std::vector<double>& gamma, std::size_t n);

// int (f-g)^2 over (-pi, pi] = 2 pi int_0^1 (f-g)^2 du.
double l2_distance_sq(const SpectralDensity& f, const SpectralDensity& g);

struct LoglikMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact mean and variance under f of the Gaussian log-likelihood ratio
// log(p_f / p_g) of an n-sample, via dense Toeplitz algebra:
//   mean = -1/2 logdet(I + G^{-1/2}(F - G)G^{-1/2}) - 1/2 tr((G - F)G^{-1})
//   4 var = tr((M G^{-1})^2) + tr(M G^{-1} F G^{-1} M F^{-1}),  M = G - F.
// Dense algebra: intended for n <= 256.
LoglikMoments gaussian_ts_loglik_moments(const SpectralDensity& f, const SpectralDensity& g,
                                         std::size_t n);

// Periodogram ordinates I(2j/n) = |sum_t x_t e^{-2 pi i j t / n}|^2 / (2 pi n)
// for j = 1..floor(n/2).
std::vector<double> periodogram(const std::vector<double>& x);

// Relative gap of the full-spectrum Parseval identity
// 2 pi sum_{j=0}^{n-1} I_j = sum_t x_t^2.
double parseval_gap(const std::vector<double>& x);

// sum_j [ -log f(2j/n) - I_j / f(2j/n) ]; the exponential-sample approximate
// log likelihood. ordinates.size() determines nu.
double whittle_loglik(const SpectralDensity& f, const std::vector<double>& ordinates,
                      std::size_t n);

// sqrt(nu^{-1} sum_i (f1(2i/n) - f2(2i/n))^2), nu = floor(n/2).
double dbar_distance(const SpectralDensity& f1, const SpectralDensity& f2, std::size_t n);

// Root average squared Hellinger distance between the exponential ordinate
// distributions with means f1(2i/n), f2(2i/n); the metric sandwiched by
// dbar/(2M) and dbar/(2m) for m <= f <= M.
double exponential_dn(const SpectralDensity& f1, const SpectralDensity& f2, std::size_t n);

// Exact draw of a length-n zero-mean Gaussian series with the tabulated
// spectral density, by the innovations (Levinson-Durbin) recursion on the
// exact autocovariances. O(n^2) time, O(n) memory.
std::vector<double> simulate_gaussian_ts(const SpectralDensity& f, std::size_t n,
                                         std::mt19937_64& eng);
std::vector<double> simulate_gaussian_ts(const std::vector<double>& gamma, std::size_t n,
                                         std::mt19937_64& eng);

struct WhittleSummary {
  double ess = 0.0;
  double radius = 0.0;          // weighted quantile of dbar to f0
  double mass_outside_2 = 0.0;  // weighted mass at dbar > 2 eps_ref
  double mass_outside_5 = 0.0;
  double mean_mid = 0.0;        // posterior mean of f at the middle ordinate
  double f0_mid = 0.0;
  bool ess_low = false;
  std::size_t draws = 0;
};

// Importance-sampled Whittle posterior: S prior draws weighted by
// exp(whittle_loglik). Distances are dbar to f0. Empty data recovers the
// prior (all weights equal).
WhittleSummary whittle_posterior_is(const std::vector<double>& x,
                                    const BernsteinDirichletPrior& prior,
                                    const SpectralDensity& f0, std::size_t S, double quantile,
                                    double eps_ref, std::mt19937_64& eng);

}  // namespace ratelab::spectral

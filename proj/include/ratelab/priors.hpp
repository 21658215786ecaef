#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace ratelab {

// --- Gaussian sequence prior -------------------------------------------------
//
// theta_i ~ N(0, variances[i]) independently for i = 1..k (coordinates past k
// are fixed at zero by the models consuming this prior).

struct SequencePrior {
  std::size_t k = 0;
  std::vector<double> variances;  // size k
  double alpha = 1.0;             // smoothness the variances are tuned for

  void validate() const;
};

std::vector<double> sample_sequence_prior(const SequencePrior& prior, std::mt19937_64& eng);

// Flatness diagnostic k * min_i variances[i] * i^(2 alpha); rate-adapted
// variance profiles keep this bounded away from 0 and infinity.
double variance_decay_floor(const SequencePrior& prior);

// --- random histogram on [-A, A] ----------------------------------------------
//
// K equal bins, heights iid Uniform[-M, M]; the induced step function
// vanishes outside [-A, A].

struct HistogramPrior {
  std::size_t K = 1;
  double M = 1.0;  // height bound
  double A = 1.0;  // domain half-width

  void validate() const;
};

std::vector<double> sample_histogram(const HistogramPrior& prior, std::mt19937_64& eng);

double histogram_value(const HistogramPrior& prior, const std::vector<double>& heights, double x);

// --- Dirichlet process via stick breaking -------------------------------------

struct StickBreakingDP {
  double mass = 1.0;        // concentration
  double base_loc = 0.0;    // base cdf gamma((t - loc)/scale), gamma = standard normal
  double base_scale = 1.0;
  std::size_t truncation = 0;  // 0: pick automatically as max(16, ceil(40 mass))

  std::size_t effective_truncation() const;
  void validate() const;
};

struct DiscreteCdf {
  std::vector<double> atoms;    // sorted
  std::vector<double> weights;  // aligned with atoms, sum = 1 - residual
  double residual = 0.0;        // stick mass past the truncation point

  // H(t) = sum of weights of atoms <= t, normalized by the retained mass.
  double operator()(double t) const;
};

DiscreteCdf sample_dp_cdf(const StickBreakingDP& prior, std::mt19937_64& eng);

// --- Bernstein-Dirichlet scaled densities --------------------------------------
//
// f = tau * q with q a Bernstein-polynomial mixture whose order is drawn from
// rho(k) proportional to exp(-decay k) (so exp(-b1 k log k) <= rho(k) <=
// exp(-b2 k) holds with b1 = b2 = decay) and whose weights are Dirichlet with
// a flat concentration. Draws are rejected until m < f < M everywhere on the
// tabulation grid.

struct BernsteinDirichletPrior {
  double decay = 0.3;
  std::size_t k_max = 30;
  double dir_conc = 1.0;
  double band_lo = 0.05, band_hi = 0.5;  // envelope (m, M)
  double tau_lo = 0.08, tau_hi = 0.32;   // uniform prior on the scale
  std::size_t grid = 512;
  std::size_t max_rejections = 10000;

  void validate() const;
};

struct TabulatedFn {
  std::vector<double> xs, ys;
};

struct BernsteinDraw {
  TabulatedFn fn;       // tabulated on [0,1]
  std::size_t order = 0;
  double tau = 0.0;
  std::size_t rejections = 0;
};

// Mixture density q on [0,1] of the given order/weights, evaluated termwise.
double bernstein_density(std::size_t order, const std::vector<double>& weights, double x);

BernsteinDraw sample_bernstein_density(const BernsteinDirichletPrior& prior, std::mt19937_64& eng);

// --- small-ball probability estimate --------------------------------------------

enum class BallNorm { Sup, L2 };

struct SmallBallEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::size_t hits = 0;
  std::size_t draws = 0;
  double upper95 = 0.0;  // rule-of-three bound when hits == 0, else estimate + 2 se
  bool zero_hits = false;
};

// sampler draws a coordinate vector comparable to f0 (same length).
SmallBallEstimate small_ball_estimate(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler,
    const std::vector<double>& f0, double eps, BallNorm norm, std::size_t draws,
    std::uint64_t seed);

}  // namespace ratelab

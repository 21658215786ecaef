#include "ratelab/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ratelab/rng.hpp"
#include "ratelab/stats.hpp"

namespace ratelab {

// --- sequence prior ----------------------------------------------------------

void SequencePrior::validate() const {
  if (k == 0 || variances.size() != k)
    throw std::invalid_argument("sequence prior: need k >= 1 matching variances");
  for (double v : variances)
    if (!(v > 0.0)) throw std::invalid_argument("sequence prior: variances must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("sequence prior: alpha must be >= 0");
}

std::vector<double> sample_sequence_prior(const SequencePrior& prior, std::mt19937_64& eng) {
  prior.validate();
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> theta(prior.k);
  for (std::size_t i = 0; i < prior.k; ++i) theta[i] = std::sqrt(prior.variances[i]) * z(eng);
  return theta;
}

double variance_decay_floor(const SequencePrior& prior) {
  prior.validate();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prior.k; ++i) {
    double idx = static_cast<double>(i + 1);
    lo = std::min(lo, prior.variances[i] * std::pow(idx, 2.0 * prior.alpha));
  }
  return lo * static_cast<double>(prior.k);
}

// --- histogram prior -----------------------------------------------------------

void HistogramPrior::validate() const {
  if (K == 0) throw std::invalid_argument("histogram prior: need K >= 1");
  if (!(M > 0.0) || !(A > 0.0))
    throw std::invalid_argument("histogram prior: M and A must be > 0");
}

std::vector<double> sample_histogram(const HistogramPrior& prior, std::mt19937_64& eng) {
  prior.validate();
  std::uniform_real_distribution<double> u(-prior.M, prior.M);
  std::vector<double> h(prior.K);
  for (auto& v : h) v = u(eng);
  return h;
}

double histogram_value(const HistogramPrior& prior, const std::vector<double>& heights,
                       double x) {
  if (heights.size() != prior.K) throw std::invalid_argument("histogram_value: height count");
  if (x < -prior.A || x >= prior.A) return 0.0;
  double width = 2.0 * prior.A / static_cast<double>(prior.K);
  auto bin = static_cast<std::size_t>((x + prior.A) / width);
  if (bin >= prior.K) bin = prior.K - 1;
  return heights[bin];
}

// --- stick breaking --------------------------------------------------------------

void StickBreakingDP::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("stick-breaking: mass must be > 0");
  if (!(base_scale > 0.0)) throw std::invalid_argument("stick-breaking: scale must be > 0");
}

std::size_t StickBreakingDP::effective_truncation() const {
  if (truncation > 0) return truncation;
  // E[untouched stick mass] = (mass/(1+mass))^T; the floor of 16 keeps that
  // expectation below 1e-8 for small masses where ceil(40 mass) alone is
  // too short.
  auto by_mass = static_cast<std::size_t>(std::ceil(40.0 * mass));
  return std::max<std::size_t>(16, by_mass);
}

double DiscreteCdf::operator()(double t) const {
  double kept = 1.0 - residual;
  if (kept <= 0.0) return 0.0;
  auto it = std::upper_bound(atoms.begin(), atoms.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - atoms.begin());
  double s = 0.0;
  for (std::size_t i = 0; i < idx; ++i) s += weights[i];
  return s / kept;
}

DiscreteCdf sample_dp_cdf(const StickBreakingDP& prior, std::mt19937_64& eng) {
  prior.validate();
  const std::size_t T = prior.effective_truncation();
  std::gamma_distribution<double> g1(1.0, 1.0), gm(prior.mass, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);

  std::vector<std::pair<double, double>> aw(T);
  double remaining = 1.0;
  for (std::size_t j = 0; j < T; ++j) {
    // Beta(1, mass) stick via two gammas
    double a = g1(eng), b = gm(eng);
    double stick = a / (a + b);
    aw[j].second = remaining * stick;
    remaining *= (1.0 - stick);
    aw[j].first = prior.base_loc + prior.base_scale * z(eng);
  }
  std::sort(aw.begin(), aw.end());
  DiscreteCdf cdf;
  cdf.atoms.reserve(T);
  cdf.weights.reserve(T);
  for (auto& [atom, weight] : aw) {
    cdf.atoms.push_back(atom);
    cdf.weights.push_back(weight);
  }
  cdf.residual = remaining;
  return cdf;
}

// --- Bernstein-Dirichlet -----------------------------------------------------------

void BernsteinDirichletPrior::validate() const {
  if (!(decay > 0.0)) throw std::invalid_argument("bernstein prior: decay must be > 0");
  if (k_max < 1) throw std::invalid_argument("bernstein prior: k_max must be >= 1");
  if (!(dir_conc > 0.0)) throw std::invalid_argument("bernstein prior: dir_conc must be > 0");
  if (!(band_lo > 0.0 && band_hi > band_lo))
    throw std::invalid_argument("bernstein prior: need 0 < band_lo < band_hi");
  if (!(tau_lo > 0.0 && tau_hi >= tau_lo))
    throw std::invalid_argument("bernstein prior: need 0 < tau_lo <= tau_hi");
  if (grid < 8) throw std::invalid_argument("bernstein prior: grid too small");
}

double bernstein_density(std::size_t order, const std::vector<double>& weights, double x) {
  if (order == 0 || weights.size() != order)
    throw std::invalid_argument("bernstein_density: weights must match order");
  if (x < 0.0 || x > 1.0) return 0.0;
  const std::size_t k = order;
  // q(x) = k * sum_j w_j Binom(j-1; k-1, x); evaluate the binomial row by the
  // multiplicative recurrence, in linear time.
  const std::size_t m = k - 1;
  double s = 0.0;
  double pmf = std::pow(1.0 - x, static_cast<double>(m));  // Binom(0; m, x)
  if (pmf == 0.0 && x < 1.0) {
    // underflow guard: recompute in log space
    for (std::size_t j = 0; j < k; ++j) {
      double lg = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) +
                  j * std::log(x) + (m - j) * std::log1p(-x);
      s += weights[j] * std::exp(lg);
    }
    return s * static_cast<double>(k);
  }
  for (std::size_t j = 0;; ++j) {
    s += weights[j] * pmf;
    if (j == m) break;
    if (x >= 1.0) {
      pmf = (j + 1 == m) ? 1.0 : 0.0;  // all mass at j = m
      continue;
    }
    pmf *= static_cast<double>(m - j) / static_cast<double>(j + 1) * (x / (1.0 - x));
  }
  return s * static_cast<double>(k);
}

BernsteinDraw sample_bernstein_density(const BernsteinDirichletPrior& prior,
                                       std::mt19937_64& eng) {
  prior.validate();
  // order pmf rho(k) ~ exp(-decay k), k = 1..k_max
  std::vector<double> rho(prior.k_max);
  for (std::size_t k = 1; k <= prior.k_max; ++k)
    rho[k - 1] = std::exp(-prior.decay * static_cast<double>(k));
  std::discrete_distribution<std::size_t> order_dist(rho.begin(), rho.end());
  std::gamma_distribution<double> gam(prior.dir_conc, 1.0);
  std::uniform_real_distribution<double> utau(prior.tau_lo, prior.tau_hi);

  BernsteinDraw draw;
  for (std::size_t rejected = 0;; ++rejected) {
    if (rejected >= prior.max_rejections) {
      double acc = 0.0;  // every attempt so far failed
      throw std::runtime_error(
          "sample_bernstein_density: envelope rejection did not accept within " +
          std::to_string(prior.max_rejections) +
          " attempts (acceptance rate " + std::to_string(acc) + ")");
    }
    std::size_t k = order_dist(eng) + 1;
    std::vector<double> w(k);
    double tot = 0.0;
    for (auto& wi : w) {
      wi = gam(eng);
      tot += wi;
    }
    for (auto& wi : w) wi /= tot;
    double tau = utau(eng);

    TabulatedFn fn;
    fn.xs.resize(prior.grid);
    fn.ys.resize(prior.grid);
    bool inside = true;
    for (std::size_t i = 0; i < prior.grid; ++i) {
      double x = static_cast<double>(i) / static_cast<double>(prior.grid - 1);
      double y = tau * bernstein_density(k, w, x);
      fn.xs[i] = x;
      fn.ys[i] = y;
      if (!(y > prior.band_lo && y < prior.band_hi)) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    draw.fn = std::move(fn);
    draw.order = k;
    draw.tau = tau;
    draw.rejections = rejected;
    return draw;
  }
}

// --- small-ball estimate --------------------------------------------------------------

SmallBallEstimate small_ball_estimate(
    const std::function<std::vector<double>(std::mt19937_64&)>& sampler,
    const std::vector<double>& f0, double eps, BallNorm norm, std::size_t draws,
    std::uint64_t seed) {
  if (!(eps >= 0.0)) throw std::invalid_argument("small_ball_estimate: eps must be >= 0");
  if (draws == 0) throw std::invalid_argument("small_ball_estimate: draws must be >= 1");
  auto eng = make_engine(seed);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<double> f = sampler(eng);
    if (f.size() != f0.size())
      throw std::invalid_argument("small_ball_estimate: sampler dimension mismatch");
    double dist = 0.0;
    if (norm == BallNorm::Sup) {
      for (std::size_t i = 0; i < f.size(); ++i) dist = std::max(dist, std::fabs(f[i] - f0[i]));
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) s += sqr(f[i] - f0[i]);
      dist = std::sqrt(s / static_cast<double>(f.size()));
    }
    if (dist < eps) ++hits;
  }
  SmallBallEstimate out;
  out.hits = hits;
  out.draws = draws;
  out.estimate = static_cast<double>(hits) / static_cast<double>(draws);
  out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(draws));
  if (hits == 0) {
    out.zero_hits = true;
    out.upper95 = 3.0 / static_cast<double>(draws);  // rule of three
  } else {
    out.upper95 = out.estimate + 2.0 * out.se;
  }
  return out;
}

}  // namespace ratelab

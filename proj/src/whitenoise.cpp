#include "ratelab/whitenoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ratelab/stats.hpp"

namespace ratelab::whitenoise {

std::vector<double> simulate(const std::vector<double>& theta0, std::size_t n,
                             std::mt19937_64& eng) {
  if (n == 0) throw std::invalid_argument("whitenoise::simulate: n must be >= 1");
  std::normal_distribution<double> z(0.0, 1.0);
  double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> x(theta0.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = theta0[i] + z(eng) / root_n;
  return x;
}

CoordinatePosterior posterior(const std::vector<double>& x, std::size_t n,
                              const SequencePrior& prior) {
  prior.validate();
  if (prior.k > x.size())
    throw std::invalid_argument("whitenoise::posterior: prior dimension exceeds observation");
  CoordinatePosterior post;
  post.k = prior.k;
  post.mean.resize(prior.k);
  post.var.resize(prior.k);
  double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < prior.k; ++i) {
    double s2 = prior.variances[i];
    post.mean[i] = x[i] * nd * s2 / (1.0 + nd * s2);
    post.var[i] = s2 / (1.0 + nd * s2);
  }
  return post;
}

std::pair<double, double> kl_whitenoise(const std::vector<double>& theta0,
                                        const std::vector<double>& theta, std::size_t n) {
  if (theta0.size() != theta.size())
    throw std::invalid_argument("kl_whitenoise: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) d2 += sqr(theta[i] - theta0[i]);
  double nd = static_cast<double>(n);
  return {0.5 * nd * d2, nd * d2};
}

std::vector<double> draw_distances(const CoordinatePosterior& post,
                                   const std::vector<double>& theta0, double truth_tail_sq,
                                   std::size_t draws, std::mt19937_64& eng) {
  if (post.k > theta0.size())
    throw std::invalid_argument("draw_distances: posterior dimension exceeds truth");
  if (truth_tail_sq < 0.0) throw std::invalid_argument("draw_distances: negative tail");
  double fixed = truth_tail_sq;
  for (std::size_t i = post.k; i < theta0.size(); ++i) fixed += sqr(theta0[i]);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> sd(post.k);
  for (std::size_t i = 0; i < post.k; ++i) sd[i] = std::sqrt(post.var[i]);
  std::vector<double> out(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    double s = fixed;
    for (std::size_t i = 0; i < post.k; ++i)
      s += sqr(post.mean[i] + sd[i] * z(eng) - theta0[i]);
    out[d] = std::sqrt(s);
  }
  return out;
}

double posterior_mass_outside(const std::vector<double>& distances, double radius) {
  if (distances.empty()) throw std::invalid_argument("posterior_mass_outside: no draws");
  std::size_t outside = 0;
  for (double d : distances)
    if (d > radius) ++outside;
  return static_cast<double>(outside) / static_cast<double>(distances.size());
}

double contraction_radius(const std::vector<double>& distances, double q) {
  return quantile(distances, q);
}

PowerTruth power_truth(double alpha, double scale, std::size_t k_max) {
  if (!(alpha > 0.0) || k_max == 0)
    throw std::invalid_argument("power_truth: need alpha > 0 and k_max >= 1");
  PowerTruth t;
  t.theta0.resize(k_max);
  for (std::size_t i = 0; i < k_max; ++i)
    t.theta0[i] = scale * std::pow(static_cast<double>(i + 1), -(alpha + 1.0));
  t.tail_sq = scale * scale * power_tail(2.0 * (alpha + 1.0), k_max);
  return t;
}

}  // namespace ratelab::whitenoise

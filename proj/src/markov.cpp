#include "ratelab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ratelab/stats.hpp"

namespace ratelab::markov {

double envelope_r(double y, double M) {
  return 0.5 * (normal_pdf(y - M) + normal_pdf(y + M));
}

std::vector<double> simulate_chain(const std::function<double(double)>& f, std::size_t n,
                                   std::size_t burn_in, std::mt19937_64& eng) {
  if (n == 0) throw std::invalid_argument("simulate_chain: need n >= 1");
  std::normal_distribution<double> z(0.0, 1.0);
  double x = 0.0;
  for (std::size_t i = 0; i < burn_in; ++i) x = f(x) + z(eng);
  std::vector<double> chain;
  chain.reserve(n + 1);
  chain.push_back(x);
  for (std::size_t i = 0; i < n; ++i) {
    x = f(x) + z(eng);
    chain.push_back(x);
  }
  return chain;
}

double transition_distance(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2, double M,
                           std::size_t grid_n) {
  if (!(M > 0.0)) throw std::invalid_argument("transition_distance: M must be > 0");
  if (grid_n < 3) throw std::invalid_argument("transition_distance: grid too small");
  double lo = -M - 12.0, hi = M + 12.0;
  double h = (hi - lo) / static_cast<double>(grid_n - 1);
  auto integrand = [&](double x) {
    double diff = f1(x) - f2(x);
    return 2.0 * (1.0 - std::exp(-diff * diff / 8.0)) * envelope_r(x, M);
  };
  double s = 0.5 * (integrand(lo) + integrand(hi));
  for (std::size_t i = 1; i + 1 < grid_n; ++i) s += integrand(lo + h * static_cast<double>(i));
  return std::sqrt(std::max(0.0, s * h));
}

BinPosterior histogram_posterior(const std::vector<double>& chain, std::size_t K, double A,
                                 double M) {
  if (chain.size() < 2) throw std::invalid_argument("histogram_posterior: chain too short");
  if (K == 0 || !(A > 0.0) || !(M > 0.0))
    throw std::invalid_argument("histogram_posterior: bad bin parameters");
  BinPosterior post;
  post.K = K;
  post.A = A;
  post.M = M;
  post.count.assign(K, 0);
  std::vector<double> sum(K, 0.0);
  double width = 2.0 * A / static_cast<double>(K);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    double from = chain[i];
    if (from < -A || from >= A) continue;  // no height governs these transitions
    auto bin = static_cast<std::size_t>((from + A) / width);
    if (bin >= K) bin = K - 1;
    post.count[bin] += 1;
    sum[bin] += chain[i + 1];
  }
  post.mean.resize(K);
  post.sd.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (post.count[k] == 0) {
      post.mean[k] = 0.0;
      post.sd[k] = 0.0;  // flat prior; sampled uniformly
    } else {
      post.mean[k] = sum[k] / static_cast<double>(post.count[k]);
      post.sd[k] = 1.0 / std::sqrt(static_cast<double>(post.count[k]));
    }
  }
  return post;
}

std::vector<double> sample_heights(const BinPosterior& post, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> h(post.K);
  for (std::size_t k = 0; k < post.K; ++k) {
    if (post.count[k] == 0) {
      h[k] = -post.M + 2.0 * post.M * u01(eng);
      continue;
    }
    double lo = normal_cdf((-post.M - post.mean[k]) / post.sd[k]);
    double hi = normal_cdf((post.M - post.mean[k]) / post.sd[k]);
    if (hi - lo < 1e-300) {
      // numerically degenerate truncation window: pin to the closer bound
      h[k] = post.mean[k] < 0.0 ? -post.M : post.M;
      continue;
    }
    double u = lo + (hi - lo) * u01(eng);
    u = std::min(std::max(u, 1e-16), 1.0 - 1e-16);
    h[k] = post.mean[k] + post.sd[k] * normal_quantile(u);
    h[k] = std::min(std::max(h[k], -post.M), post.M);
  }
  return h;
}

double loglik_ratio(const std::vector<double>& chain, const std::function<double(double)>& f0,
                    const std::function<double(double)>& f1) {
  if (chain.size() < 2) throw std::invalid_argument("loglik_ratio: chain too short");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    double e0 = chain[i + 1] - f0(chain[i]);
    double e1 = chain[i + 1] - f1(chain[i]);
    s += 0.5 * (e1 * e1 - e0 * e0);
  }
  return s;
}

TruthMoments truth_moments(const std::function<double(double)>& f0, std::size_t K, double A,
                           double M, std::size_t grid_n) {
  if (K == 0 || !(A > 0.0) || !(M > 0.0) || grid_n < 3)
    throw std::invalid_argument("truth_moments: bad parameters");
  TruthMoments tm;
  tm.r_mass.assign(K, 0.0);
  tm.f0r.assign(K, 0.0);
  tm.f0sqr.assign(K, 0.0);
  double lo = -M - 12.0, hi = M + 12.0;
  double h = (hi - lo) / static_cast<double>(grid_n - 1);
  double width = 2.0 * A / static_cast<double>(K);
  for (std::size_t i = 0; i < grid_n; ++i) {
    double x = lo + h * static_cast<double>(i);
    double w = (i == 0 || i + 1 == grid_n) ? 0.5 * h : h;
    double r = envelope_r(x, M);
    double f = f0(x);
    if (x < -A || x >= A) {
      tm.outside_f0sqr += w * f * f * r;
      continue;
    }
    auto bin = static_cast<std::size_t>((x + A) / width);
    if (bin >= K) bin = K - 1;
    tm.r_mass[bin] += w * r;
    tm.f0r[bin] += w * f * r;
    tm.f0sqr[bin] += w * f * f * r;
  }
  return tm;
}

double l2r_distance(const TruthMoments& tm, const std::vector<double>& heights) {
  if (heights.size() != tm.r_mass.size())
    throw std::invalid_argument("l2r_distance: height count mismatch");
  double s = tm.outside_f0sqr;
  for (std::size_t k = 0; k < heights.size(); ++k) {
    double a = heights[k];
    s += a * a * tm.r_mass[k] - 2.0 * a * tm.f0r[k] + tm.f0sqr[k];
  }
  return std::sqrt(std::max(0.0, s));
}

std::vector<double> occupancy_density(const std::vector<double>& chain, double lo, double hi,
                                      std::size_t bins) {
  if (!(hi > lo) || bins == 0) throw std::invalid_argument("occupancy_density: bad window");
  std::vector<double> dens(bins, 0.0);
  double width = (hi - lo) / static_cast<double>(bins);
  std::size_t inside = 0;
  for (double x : chain) {
    if (x < lo || x >= hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    dens[b] += 1.0;
    ++inside;
  }
  if (inside == 0) throw std::runtime_error("occupancy_density: chain never enters window");
  for (auto& d : dens) d /= static_cast<double>(chain.size()) * width;
  return dens;
}

}  // namespace ratelab::markov

#include "ratelab/inid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ratelab/stats.hpp"

namespace ratelab::inid {

double poisson_generalized_hellinger(double l1, double m1, double l2, double m2) {
  if (l1 <= 0 || m1 <= 0 || l2 <= 0 || m2 <= 0)
    throw std::invalid_argument("poisson_generalized_hellinger: arguments must be positive");
  // sum_x (sqrt(e^{-l1} m1^x / x!) - sqrt(e^{-l2} m2^x / x!))^2
  //   = (e^{(m1-l1)/2} - e^{(m2-l2)/2})^2
  //     + 2 e^{-(l1+l2)/2} (e^{(m1+m2)/2} - e^{sqrt(m1 m2)}),
  // since sum_x m^x/x! = e^m and sum_x (m1 m2)^{x/2}/x! = e^{sqrt(m1 m2)}.
  const double a = std::exp(0.5 * (m1 - l1)) - std::exp(0.5 * (m2 - l2));
  const double cross =
      2.0 * std::exp(-0.5 * (l1 + l2)) *
      (std::exp(0.5 * (m1 + m2)) - std::exp(std::sqrt(m1 * m2)));
  return a * a + cross;
}

double poisson_generalized_hellinger_bound(double l1, double m1, double l2, double m2,
                                           double L, double U) {
  if (L <= 0 || U < L) throw std::invalid_argument("bound: need 0 < L <= U");
  const double dl = l1 - l2, dm = m1 - m2;
  return (0.5 + 0.25 / L) * std::exp(U - L) * (dl * dl + dm * dm);
}

double poisson_link_distance(const std::vector<double>& lam1, const std::vector<double>& lam2) {
  if (lam1.size() != lam2.size() || lam1.empty())
    throw std::invalid_argument("poisson_link_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < lam1.size(); ++i) {
    const double d = std::sqrt(lam1[i]) - std::sqrt(lam2[i]);
    s += 2.0 * (1.0 - std::exp(-0.5 * d * d));
  }
  // squared Hellinger between Poisson(a), Poisson(b) — the sum over the support
  // of squared root-mass differences — is 2(1 - e^{-(sqrt a - sqrt b)^2 / 2});
  // average over covariates, then take the root.
  return std::sqrt(s / static_cast<double>(lam1.size()));
}

namespace {

// Per-cell Poisson sufficient statistics for a staircase link: the log
// likelihood of assigning level v to cell c is  -v * count_c + log(v) * sum_c
// (dropping the x! terms, constant across links).
struct CellStats {
  std::vector<double> count;  // number of covariates in each cell
  std::vector<double> sum;    // total observed count in each cell
};

CellStats cell_stats(const PoissonSieve& sieve, const std::vector<double>& z,
                     const std::vector<unsigned>& x) {
  if (z.size() != x.size() || z.empty())
    throw std::invalid_argument("sieve posterior: data size mismatch");
  CellStats st;
  st.count.assign(sieve.cells, 0.0);
  st.sum.assign(sieve.cells, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t c = sieve.cell_of(z[i]);
    st.count[c] += 1.0;
    st.sum[c] += static_cast<double>(x[i]);
  }
  return st;
}

// loglik_table[c][j] = log-likelihood contribution of level j in cell c.
std::vector<std::vector<double>> loglik_table(const PoissonSieve& sieve, const CellStats& st) {
  std::vector<std::vector<double>> tab(sieve.cells,
                                       std::vector<double>(sieve.levels.size(), 0.0));
  for (std::size_t c = 0; c < sieve.cells; ++c)
    for (std::size_t j = 0; j < sieve.levels.size(); ++j) {
      const double v = sieve.levels[j];
      tab[c][j] = -v * st.count[c] + std::log(v) * st.sum[c];
    }
  return tab;
}

// dist_table[c][j] = sum over covariates in cell c of the squared Hellinger
// distance 2(1 - e^{-(sqrt v - sqrt lam0)^2/2}) between the two Poisson laws.
std::vector<std::vector<double>> distance_table(const PoissonSieve& sieve,
                                                const std::vector<double>& z,
                                                const std::vector<double>& lam0) {
  std::vector<std::vector<double>> tab(sieve.cells,
                                       std::vector<double>(sieve.levels.size(), 0.0));
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t c = sieve.cell_of(z[i]);
    const double r0 = std::sqrt(lam0[i]);
    for (std::size_t j = 0; j < sieve.levels.size(); ++j) {
      const double d = std::sqrt(sieve.levels[j]) - r0;
      tab[c][j] += 2.0 * (1.0 - std::exp(-0.5 * d * d));
    }
  }
  return tab;
}

}  // namespace

SievePosterior sieve_posterior(const PoissonSieve& sieve, const std::vector<double>& z,
                               const std::vector<unsigned>& x) {
  if (sieve.links.empty())
    throw std::invalid_argument("sieve_posterior: sieve was not enumerated; use the summary");
  const CellStats st = cell_stats(sieve, z, x);
  SievePosterior post;
  post.log_weights.resize(sieve.links.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sieve.links.size(); ++s) {
    double ll = 0.0;
    for (std::size_t c = 0; c < sieve.cells; ++c) {
      const double v = sieve.links[s][c];
      ll += -v * st.count[c] + std::log(v) * st.sum[c];
    }
    post.log_weights[s] = ll;
    if (ll > best) {
      best = ll;
      post.map_index = s;
    }
  }
  const double lse = log_sum_exp(post.log_weights);
  for (double& w : post.log_weights) w -= lse;
  return post;
}

namespace {

struct StreamAccum {
  std::vector<std::pair<double, double>> items;  // (distance, weight), weights unnormalized later
  std::vector<double> logliks;
  double count = 0.0;
};

// Depth-first enumeration of nondecreasing level assignments. At ~10^5 sieve
// elements this is instant; the nondecreasing constraint is what keeps the
// count at C(cells + levels - 1, cells) instead of levels^cells.
void enumerate_rec(const PoissonSieve& sieve, const std::vector<std::vector<double>>& ll_tab,
                   const std::vector<std::vector<double>>& d_tab, std::size_t cell,
                   std::size_t min_level, double ll_acc, double d_acc, StreamAccum& out) {
  if (cell == sieve.cells) {
    out.logliks.push_back(ll_acc);
    out.items.emplace_back(std::sqrt(d_acc), ll_acc);  // weight filled after normalization
    out.count += 1.0;
    return;
  }
  for (std::size_t j = min_level; j < sieve.levels.size(); ++j)
    enumerate_rec(sieve, ll_tab, d_tab, cell + 1, j, ll_acc + ll_tab[cell][j],
                  d_acc + d_tab[cell][j], out);
}

}  // namespace

SieveSummary sieve_posterior_summary(const PoissonSieve& sieve, const std::vector<double>& z,
                                     const std::vector<unsigned>& x,
                                     const std::vector<double>& lam0, double quantile,
                                     double eps_ref, double report_radius) {
  if (lam0.size() != z.size()) throw std::invalid_argument("sieve summary: lam0 size mismatch");
  const CellStats st = cell_stats(sieve, z, x);
  const auto ll_tab = loglik_table(sieve, st);
  auto d_tab = distance_table(sieve, z, lam0);
  // distances are averaged over covariates; pre-divide so d_acc sums to the mean
  const double inv_n = 1.0 / static_cast<double>(z.size());
  for (auto& row : d_tab)
    for (double& v : row) v *= inv_n;

  StreamAccum acc;
  enumerate_rec(sieve, ll_tab, d_tab, 0, 0, 0.0, 0.0, acc);
  const double lse = log_sum_exp(acc.logliks);
  for (std::size_t i = 0; i < acc.items.size(); ++i)
    acc.items[i].second = std::exp(acc.logliks[i] - lse);

  SieveSummary s;
  s.log_size = std::log(acc.count);
  s.radius = weighted_quantile(acc.items, quantile);
  double m2 = 0.0, m5 = 0.0, mr = 0.0;
  for (const auto& [d, w] : acc.items) {
    if (d > 2.0 * eps_ref) m2 += w;
    if (d > 5.0 * eps_ref) m5 += w;
    if (d > report_radius) mr += w;
  }
  s.mass_outside_2 = m2;
  s.mass_outside_5 = m5;
  s.mass_outside_r = mr;
  return s;
}

std::vector<unsigned> simulate_poisson(const std::vector<double>& lam, std::mt19937_64& eng) {
  std::vector<unsigned> x(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    std::poisson_distribution<unsigned> pd(lam[i]);
    x[i] = pd(eng);
  }
  return x;
}

// --- binary regression ------------------------------------------------------------

double hellinger_bernoulli(double p, double q) {
  p = std::clamp(p, 0.0, 1.0);
  q = std::clamp(q, 0.0, 1.0);
  // sum of squared root-mass differences over the two outcomes: 2(1 - BC).
  const double bc = std::sqrt(p * q) + std::sqrt((1.0 - p) * (1.0 - q));
  return 2.0 * std::max(0.0, 1.0 - std::min(1.0, bc));
}

BinaryData simulate_binary(const std::vector<double>& z,
                           const std::function<double(double)>& H0, std::mt19937_64& eng) {
  BinaryData d;
  d.z = z;
  d.y.resize(z.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < z.size(); ++i) d.y[i] = unif(eng) < H0(z[i]) ? 1u : 0u;
  return d;
}

ImportanceSummary binary_posterior_is(const BinaryData& data, const BinaryPriorSpec& prior,
                                      const std::function<double(double)>& H0, std::size_t S,
                                      double quantile, double eps_ref, std::mt19937_64& eng) {
  if (data.z.size() != data.y.size())
    throw std::invalid_argument("binary_posterior_is: data size mismatch");
  if (S == 0) throw std::invalid_argument("binary_posterior_is: need draws");
  const std::size_t n = data.z.size();
  std::vector<double> h0(n);
  for (std::size_t i = 0; i < n; ++i) h0[i] = H0(data.z[i]);

  std::uniform_real_distribution<double> uloc(prior.loc_lo, prior.loc_hi);
  std::uniform_real_distribution<double> uscale(prior.scale_lo, prior.scale_hi);

  std::vector<double> logw(S);
  std::vector<double> dist(S);
  // a zero-probability observation kills the draw; floor the link away from {0,1}
  constexpr double kFloor = 1e-12;
  for (std::size_t s = 0; s < S; ++s) {
    StickBreakingDP dp{prior.mass, uloc(eng), uscale(eng), 0};
    const DiscreteCdf cdf = sample_dp_cdf(dp, eng);
    double ll = 0.0, hsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(cdf(data.z[i]), kFloor, 1.0 - kFloor);
      ll += data.y[i] ? std::log(p) : std::log1p(-p);
      hsum += hellinger_bernoulli(p, h0[i]);  // already the squared distance
    }
    logw[s] = ll;
    dist[s] = n > 0 ? std::sqrt(hsum / static_cast<double>(n)) : 0.0;
  }
  const double lse = log_sum_exp(logw);
  std::vector<std::pair<double, double>> items(S);
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double w = std::exp(logw[s] - lse);
    items[s] = {dist[s], w};
    sw += w;
    sw2 += w * w;
  }
  ImportanceSummary out;
  out.draws = S;
  out.ess = sw * sw / sw2;
  out.ess_low = out.ess < 50.0;
  out.radius = weighted_quantile(items, quantile);
  double m2 = 0.0, m5 = 0.0;
  for (const auto& [d, w] : items) {
    if (d > 2.0 * eps_ref) m2 += w;
    if (d > 5.0 * eps_ref) m5 += w;
  }
  out.mass_outside_2 = m2 / sw;
  out.mass_outside_5 = m5 / sw;
  return out;
}

std::vector<double> binary_is_weights(const BinaryData& data,
                                      const std::vector<std::vector<double>>& links) {
  if (data.z.size() != data.y.size())
    throw std::invalid_argument("binary_is_weights: data size mismatch");
  if (links.empty()) throw std::invalid_argument("binary_is_weights: need draws");
  const std::size_t n = data.z.size();
  constexpr double kFloor = 1e-12;
  std::vector<double> logw(links.size());
  for (std::size_t s = 0; s < links.size(); ++s) {
    if (links[s].size() != n)
      throw std::invalid_argument("binary_is_weights: link tabulation size mismatch");
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(links[s][i], kFloor, 1.0 - kFloor);
      ll += data.y[i] ? std::log(p) : std::log1p(-p);
    }
    logw[s] = ll;
  }
  const double lse = log_sum_exp(logw);
  std::vector<double> w(links.size());
  double sw = 0.0;
  for (std::size_t s = 0; s < links.size(); ++s) {
    w[s] = std::exp(logw[s] - lse);
    sw += w[s];
  }
  for (double& x : w) x /= sw;
  return w;
}

// --- parametric grid ------------------------------------------------------------

ParametricFamily parametric_family_from_string(const std::string& name) {
  if (name == "normal-location-scaled") return ParametricFamily::NormalLocationScaled;
  if (name == "uniform-endpoint") return ParametricFamily::UniformEndpoint;
  throw std::invalid_argument("unknown parametric family: " + name);
}

GridPosterior grid_posterior(ParametricFamily family, const std::vector<double>& data,
                             const std::vector<double>& scales, double lo, double hi,
                             double mesh) {
  if (data.empty()) throw std::invalid_argument("grid_posterior: no data");
  if (!(mesh > 0) || !(hi > lo)) throw std::invalid_argument("grid_posterior: bad grid");
  const std::size_t m = static_cast<std::size_t>(std::floor((hi - lo) / mesh + 1e-9)) + 1;
  GridPosterior gp;
  gp.theta.resize(m);
  std::vector<double> ll(m);
  for (std::size_t j = 0; j < m; ++j) gp.theta[j] = lo + static_cast<double>(j) * mesh;

  if (family == ParametricFamily::NormalLocationScaled) {
    std::vector<double> sd(data.size(), 1.0);
    if (!scales.empty()) {
      if (scales.size() != data.size())
        throw std::invalid_argument("grid_posterior: scales size mismatch");
      sd = scales;
    }
    // sufficient statistics: loglik(theta) = -1/2 sum ((x_i - theta)/sd_i)^2 + const
    double a = 0.0, b = 0.0;  // sum 1/sd^2, sum x/sd^2
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double w = 1.0 / (sd[i] * sd[i]);
      a += w;
      b += data[i] * w;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double t = gp.theta[j];
      ll[j] = -0.5 * (a * t * t - 2.0 * b * t);
    }
  } else {
    // uniform on [0, theta]: likelihood theta^{-n} 1{theta >= max x}
    const double mx = *std::max_element(data.begin(), data.end());
    if (mx < 0) throw std::invalid_argument("grid_posterior: uniform data must be nonnegative");
    const double nn = static_cast<double>(data.size());
    for (std::size_t j = 0; j < m; ++j) {
      const double t = gp.theta[j];
      ll[j] = (t >= mx && t > 0) ? -nn * std::log(t)
                                 : -std::numeric_limits<double>::infinity();
    }
  }

  const double lse = log_sum_exp(ll);
  if (!std::isfinite(lse))
    throw std::runtime_error("grid_posterior: no grid point carries likelihood");
  gp.weight.resize(m);
  for (std::size_t j = 0; j < m; ++j) gp.weight[j] = std::exp(ll[j] - lse);

  // mass piling up within one mesh of either grid edge means the grid clips
  // the region the posterior wants to occupy (for the uniform endpoint the
  // likelihood is zero below max x, so an interior peak never trips this)
  gp.boundary_mass = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    if (gp.theta[j] <= lo + mesh || gp.theta[j] >= hi - mesh) gp.boundary_mass += gp.weight[j];
  if (gp.boundary_mass > 1e-3)
    throw std::runtime_error("grid_posterior: boundary mass " + std::to_string(gp.boundary_mass) +
                             " exceeds 1e-3; widen the grid");
  return gp;
}

double grid_abs_quantile(const GridPosterior& gp, double theta0, double q) {
  std::vector<std::pair<double, double>> items(gp.theta.size());
  for (std::size_t j = 0; j < gp.theta.size(); ++j)
    items[j] = {std::abs(gp.theta[j] - theta0), gp.weight[j]};
  return weighted_quantile(items, q);
}

double grid_mass_outside(const GridPosterior& gp, double theta0, double radius) {
  double m = 0.0;
  for (std::size_t j = 0; j < gp.theta.size(); ++j)
    if (std::abs(gp.theta[j] - theta0) > radius) m += gp.weight[j];
  return m;
}

std::vector<double> simulate_parametric(ParametricFamily family, double theta0,
                                        const std::vector<double>& scales, std::size_t n,
                                        std::mt19937_64& eng) {
  std::vector<double> x(n);
  if (family == ParametricFamily::NormalLocationScaled) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double sd = scales.empty() ? 1.0 : scales[i % scales.size()];
      x[i] = theta0 + sd * nd(eng);
    }
  } else {
    std::uniform_real_distribution<double> ud(0.0, theta0);
    for (std::size_t i = 0; i < n; ++i) x[i] = ud(eng);
  }
  return x;
}

}  // namespace ratelab::inid

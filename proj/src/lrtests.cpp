#include "ratelab/lrtests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ratelab/covering.hpp"
#include "ratelab/divergences.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/stats.hpp"

namespace ratelab::lrt {

namespace {

double binom_se(double p, std::size_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> padded(const std::vector<double>& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

double sample_density(const Density& d, std::mt19937_64& eng) {
  switch (d.family) {
    case Family::NormalLocation: {
      std::normal_distribution<double> nd(d.a, 1.0);
      return nd(eng);
    }
    case Family::Normal: {
      std::normal_distribution<double> nd(d.a, std::sqrt(d.b));
      return nd(eng);
    }
    case Family::Poisson: {
      std::poisson_distribution<long> pd(d.a);
      return static_cast<double>(pd(eng));
    }
    case Family::Bernoulli: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(eng) < d.a ? 1.0 : 0.0;
    }
    case Family::Exponential: {
      std::exponential_distribution<double> ed(1.0 / d.a);
      return ed(eng);
    }
    case Family::Grid:
      break;
  }
  throw std::invalid_argument("sample_density: unsupported family");
}

Density with_param(const Density& proto, double par) {
  switch (proto.family) {
    case Family::NormalLocation:
      return Density::normal_location(par);
    case Family::Normal:
      return Density::normal(par, proto.b);
    case Family::Poisson:
      return Density::poisson(par);
    case Family::Bernoulli:
      return Density::bernoulli(par);
    case Family::Exponential:
      return Density::exponential(par);
    case Family::Grid:
      break;
  }
  throw std::invalid_argument("with_param: unsupported family");
}

double param_of(const Density& d) { return d.a; }

// Valid open parameter interval for perturbations.
std::pair<double, double> param_limits(Family f) {
  switch (f) {
    case Family::NormalLocation:
    case Family::Normal:
      return {-1e9, 1e9};
    case Family::Poisson:
    case Family::Exponential:
      return {1e-2, 1e9};
    case Family::Bernoulli:
      return {5e-3, 1.0 - 5e-3};
    default:
      return {0.0, 0.0};
  }
}

// Parameter at Hellinger distance `target` from p1 along direction dir
// (bisection; h is monotone in |t| locally). Returns p1's parameter when
// even the farthest admissible point stays inside the target ball.
double param_at_distance(const Density& p1, double dir, double target, double t_max) {
  const double par1 = param_of(p1);
  auto dist = [&](double t) {
    return std::sqrt(hellinger_sq(with_param(p1, par1 + t * dir), p1));
  };
  if (dist(t_max) <= target) return par1 + t_max * dir;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) <= target ? lo : hi) = mid;
  }
  return par1 + lo * dir;
}

}  // namespace

TestReport whitenoise_lr_test(const std::vector<double>& theta0,
                              const std::vector<double>& theta1, std::size_t n,
                              std::size_t replicates, std::uint64_t seed) {
  if (replicates == 0 || n == 0) throw std::invalid_argument("whitenoise_lr_test: empty run");
  const std::size_t dim = std::max(theta0.size(), theta1.size());
  const std::vector<double> t0 = padded(theta0, dim), t1 = padded(theta1, dim);
  std::vector<double> delta(dim);
  for (std::size_t i = 0; i < dim; ++i) delta[i] = t1[i] - t0[i];
  const double D = norm(delta);
  if (!(D > 0)) throw std::invalid_argument("whitenoise_lr_test: theta0 == theta1");
  double rhs = 0.0;
  for (std::size_t i = 0; i < dim; ++i) rhs += t1[i] * t1[i] - t0[i] * t0[i];

  const double sqn = std::sqrt(static_cast<double>(n));
  std::vector<double> u(dim);
  for (std::size_t i = 0; i < dim; ++i) u[i] = delta[i] / D;

  std::vector<std::vector<double>> alts;
  alts.push_back(t1);
  for (double s : {1.0, -1.0}) {
    std::vector<double> a = t1;
    for (std::size_t i = 0; i < dim; ++i) a[i] += s * (D / 4.0) * u[i];
    alts.push_back(a);
  }
  if (dim >= 2) {
    // orthogonal direction: axis least aligned with u, Gram-Schmidt
    std::size_t ax = 0;
    for (std::size_t i = 1; i < dim; ++i)
      if (std::abs(u[i]) < std::abs(u[ax])) ax = i;
    std::vector<double> v(dim, 0.0);
    v[ax] = 1.0;
    for (std::size_t i = 0; i < dim; ++i) v[i] -= u[ax] * u[i];
    const double vn = norm(v);
    std::vector<double> a = t1;
    for (std::size_t i = 0; i < dim; ++i) a[i] += (D / 4.0) * v[i] / vn;
    alts.push_back(a);
  }

  auto rejects = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += delta[i] * x[i];
    return 2.0 * s > rhs;
  };

  std::mt19937_64 eng = make_engine(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto draw = [&](const std::vector<double>& th) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = th[i] + nd(eng) / sqn;
    return x;
  };

  TestReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.separation = D;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replicates; ++r)
    if (rejects(draw(t0))) ++hits;
  rep.type1 = static_cast<double>(hits) / static_cast<double>(replicates);
  rep.type1_se = binom_se(rep.type1, replicates);
  rep.type1_bound = normal_sf(sqn * D / 2.0);

  rep.type2 = 0.0;
  for (const auto& alt : alts) {
    std::size_t acc = 0;
    for (std::size_t r = 0; r < replicates; ++r)
      if (!rejects(draw(alt))) ++acc;
    const double p = static_cast<double>(acc) / static_cast<double>(replicates);
    if (p >= rep.type2) {
      rep.type2 = p;
      rep.type2_se = binom_se(p, replicates);
    }
  }
  rep.type2_bound = normal_sf(sqn * D / 4.0);
  rep.note = "alternatives probed: " + std::to_string(alts.size());
  return rep;
}

TestReport product_lr_test(const Density& p0, const Density& p1, std::size_t n,
                           std::size_t replicates, std::uint64_t seed) {
  if (replicates == 0 || n == 0) throw std::invalid_argument("product_lr_test: empty run");
  if (p0.family != p1.family || p0.family == Family::Grid)
    throw std::invalid_argument("product_lr_test: need a shared parametric family");
  const double h2 = hellinger_sq(p0, p1);
  if (!(h2 > 0)) throw std::invalid_argument("product_lr_test: identical product laws");
  const double dn = std::sqrt(h2);
  const double bound = std::exp(-0.5 * static_cast<double>(n) * h2);

  std::mt19937_64 eng = make_engine(seed);
  auto loglr = [&](const Density& gen) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sample_density(gen, eng);
      s += p1.log_pdf(x) - p0.log_pdf(x);
    }
    return s;
  };

  TestReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.separation = dn;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < replicates; ++r)
    if (loglr(p0) >= 0.0) ++hits;
  rep.type1 = static_cast<double>(hits) / static_cast<double>(replicates);
  rep.type1_se = binom_se(rep.type1, replicates);
  rep.type1_bound = bound;

  // alternatives within dn/18 of p1, along the parameter line through p0
  const double par0 = param_of(p0), par1 = param_of(p1);
  const auto [plo, phi] = param_limits(p1.family);
  const double target = dn / 18.0;
  std::vector<Density> alts{p1};
  {
    const double toward = par0 - par1;  // direction of p0
    alts.push_back(with_param(p1, param_at_distance(p1, toward, target, 1.0)));
    const double away = -toward;
    const double t_max =
        away > 0 ? (phi - par1) / away : (away < 0 ? (plo - par1) / away : 0.0);
    if (t_max > 0)
      alts.push_back(with_param(p1, param_at_distance(p1, away, target, std::min(1.0, t_max))));
  }
  rep.type2 = 0.0;
  for (const auto& alt : alts) {
    std::size_t acc = 0;
    for (std::size_t r = 0; r < replicates; ++r)
      if (loglr(alt) < 0.0) ++acc;
    const double p = static_cast<double>(acc) / static_cast<double>(replicates);
    if (p >= rep.type2) {
      rep.type2 = p;
      rep.type2_se = binom_se(p, replicates);
    }
  }
  rep.type2_bound = bound;
  rep.note = p0.describe() + " vs " + p1.describe();
  return rep;
}

ShellNet make_shell_net(const std::vector<double>& theta0, std::size_t j, double eps,
                        std::size_t candidates, std::uint64_t seed) {
  if (j == 0 || !(eps > 0) || candidates == 0 || theta0.empty())
    throw std::invalid_argument("make_shell_net: bad arguments");
  const std::size_t dim = theta0.size();
  std::mt19937_64 eng = make_engine(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> un(0.0, 1.0);

  PointCloud cloud;
  cloud.metric = PointCloud::Metric::Euclidean;
  cloud.points.reserve(candidates);
  const double jeps = static_cast<double>(j) * eps;
  for (std::size_t c = 0; c < candidates; ++c) {
    std::vector<double> dir(dim);
    double dn2 = 0.0;
    for (auto& v : dir) {
      v = nd(eng);
      dn2 += v * v;
    }
    const double r = jeps + eps * un(eng);  // in (j eps, (j+1) eps]
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < dim; ++i) p[i] = theta0[i] + r * dir[i] / std::sqrt(dn2);
    cloud.points.push_back(std::move(p));
  }

  ShellNet net;
  net.j = j;
  net.mesh = jeps / 4.0;
  for (std::size_t idx : greedy_cover(cloud, net.mesh))
    net.points.push_back(cloud.points[idx]);
  return net;
}

AggregateReport aggregate_whitenoise_test(const std::vector<double>& theta0,
                                          const std::vector<ShellNet>& nets, std::size_t n,
                                          double eps, std::size_t replicates,
                                          std::uint64_t seed, double K) {
  if (nets.empty()) throw std::invalid_argument("aggregate_whitenoise_test: no nets");
  for (const auto& net : nets)
    if (net.points.empty()) throw std::invalid_argument("aggregate_whitenoise_test: empty net");
  const std::size_t dim = theta0.size();
  const double sqn = std::sqrt(static_cast<double>(n));

  // flat list of point tests: reject when 2<theta1 - theta0, x> > |theta1|^2 - |theta0|^2
  struct PointTest {
    std::vector<double> delta;
    double rhs = 0.0;
    std::size_t shell = 0;
  };
  std::vector<PointTest> tests;
  for (std::size_t s = 0; s < nets.size(); ++s)
    for (const auto& p : nets[s].points) {
      if (p.size() != dim)
        throw std::invalid_argument("aggregate_whitenoise_test: dimension mismatch");
      PointTest pt;
      pt.delta.resize(dim);
      pt.shell = s;
      for (std::size_t i = 0; i < dim; ++i) {
        pt.delta[i] = p[i] - theta0[i];
        pt.rhs += p[i] * p[i] - theta0[i] * theta0[i];
      }
      tests.push_back(std::move(pt));
    }

  auto any_rejects = [&](const std::vector<double>& x, std::vector<std::size_t>* per_point) {
    bool any = false;
    for (std::size_t t = 0; t < tests.size(); ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += tests[t].delta[i] * x[i];
      if (2.0 * s > tests[t].rhs) {
        any = true;
        if (per_point)
          ++(*per_point)[t];
        else
          return true;
      }
    }
    return any;
  };

  std::mt19937_64 eng = make_engine(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto draw = [&](const std::vector<double>& th) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = th[i] + nd(eng) / sqn;
    return x;
  };

  AggregateReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.eps = eps;
  rep.K = K;

  std::vector<std::size_t> per_point(tests.size(), 0);
  std::size_t direct = 0;
  for (std::size_t r = 0; r < replicates; ++r)
    if (any_rejects(draw(theta0), &per_point)) ++direct;
  rep.type1_direct = static_cast<double>(direct) / static_cast<double>(replicates);
  rep.type1_se = binom_se(rep.type1_direct, replicates);

  rep.shells.resize(nets.size());
  std::size_t n_max = 0;
  for (std::size_t s = 0; s < nets.size(); ++s) {
    rep.shells[s].j = nets[s].j;
    rep.shells[s].net_size = nets[s].points.size();
    n_max = std::max(n_max, nets[s].points.size());
  }
  for (std::size_t t = 0; t < tests.size(); ++t)
    rep.shells[tests[t].shell].type1_sum +=
        static_cast<double>(per_point[t]) / static_cast<double>(replicates);
  for (const auto& sh : rep.shells) rep.type1_sum += sh.type1_sum;

  const double e1 = std::exp(-K * static_cast<double>(n) * eps * eps);
  rep.series_bound = e1 < 1.0 ? static_cast<double>(n_max) * e1 / (1.0 - e1)
                              : std::numeric_limits<double>::infinity();

  // type-II: run the combined test with each net point as the truth
  const std::size_t alt_reps = std::max<std::size_t>(2000, replicates / 10);
  for (std::size_t s = 0; s < nets.size(); ++s) {
    auto& sh = rep.shells[s];
    sh.type2_bound = normal_sf(sqn * static_cast<double>(nets[s].j) * eps / 4.0);
    for (const auto& p : nets[s].points) {
      std::size_t acc = 0;
      for (std::size_t r = 0; r < alt_reps; ++r)
        if (!any_rejects(draw(p), nullptr)) ++acc;
      const double prob = static_cast<double>(acc) / static_cast<double>(alt_reps);
      if (prob >= sh.type2_max) {
        sh.type2_max = prob;
        sh.type2_se = binom_se(prob, alt_reps);
      }
    }
  }
  return rep;
}

double normal_abs_moment(double k) {
  if (k < 0) throw std::invalid_argument("normal_abs_moment: k must be nonnegative");
  return std::pow(2.0, k / 2.0) * std::tgamma((k + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

double evidence_membership_radius(double eps, double k) {
  // K <= n eps^2 gives |delta| <= sqrt(2) eps; V_k0 = m_k (n |delta|^2)^{k/2}
  // <= (n eps^2)^{k/2} gives |delta| <= eps m_k^{-1/k}
  return eps * std::min(std::sqrt(2.0), std::pow(normal_abs_moment(k), -1.0 / k));
}

EvidenceReport evidence_bound_check(const std::vector<double>& theta0,
                                    const SequencePrior& prior, double C, double k,
                                    std::size_t n, double eps, std::size_t support,
                                    std::size_t replicates, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("evidence_bound_check: k >= 2 required");
  if (!(C > 0) || !(eps > 0) || support == 0 || replicates == 0)
    throw std::invalid_argument("evidence_bound_check: bad arguments");
  prior.validate();
  const std::size_t dim = std::max(theta0.size(), prior.k);
  const std::vector<double> t0 = padded(theta0, dim);
  const double radius = evidence_membership_radius(eps, k);
  const double ne2 = static_cast<double>(n) * eps * eps;

  std::mt19937_64 eng = make_engine(seed);
  std::vector<std::vector<double>> atoms;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 200000 * support;
  while (atoms.size() < support && attempts < max_attempts) {
    ++attempts;
    std::vector<double> th = padded(sample_sequence_prior(prior, eng), dim);
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = th[i] - t0[i];
      d2 += d * d;
    }
    if (std::sqrt(d2) <= radius) atoms.push_back(std::move(th));
  }
  if (atoms.size() < support)
    throw std::runtime_error("evidence_bound_check: restricted prior empty (acceptance " +
                             std::to_string(static_cast<double>(atoms.size()) /
                                            static_cast<double>(attempts)) +
                             ")");

  // per-atom: log LR(x) = n <th - t0, x> + n/2 (|t0|^2 - |th|^2)
  std::vector<double> shift(atoms.size());
  for (std::size_t s = 0; s < atoms.size(); ++s) {
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      n0 += t0[i] * t0[i];
      n1 += atoms[s][i] * atoms[s][i];
    }
    shift[s] = 0.5 * static_cast<double>(n) * (n0 - n1);
  }

  const double sqn = std::sqrt(static_cast<double>(n));
  const double threshold = -(1.0 + C) * ne2;
  std::normal_distribution<double> nd(0.0, 1.0);
  std::size_t hits = 0;
  std::vector<double> loglr(atoms.size());
  for (std::size_t r = 0; r < replicates; ++r) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = t0[i] + nd(eng) / sqn;
    for (std::size_t s = 0; s < atoms.size(); ++s) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += (atoms[s][i] - t0[i]) * x[i];
      loglr[s] = static_cast<double>(n) * dot + shift[s];
    }
    const double log_evidence =
        log_sum_exp(loglr) - std::log(static_cast<double>(atoms.size()));
    if (log_evidence <= threshold) ++hits;
  }

  EvidenceReport rep;
  rep.freq = static_cast<double>(hits) / static_cast<double>(replicates);
  rep.se = binom_se(rep.freq, replicates);
  rep.bound = std::pow(C, -k) * std::pow(ne2, -k / 2.0);
  rep.threshold = threshold;
  rep.accept_rate = static_cast<double>(atoms.size()) / static_cast<double>(attempts);
  rep.support_size = atoms.size();
  rep.n = n;
  rep.replicates = replicates;
  rep.eps = eps;
  rep.C = C;
  rep.k = k;
  return rep;
}

}  // namespace ratelab::lrt

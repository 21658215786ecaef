#include "ratelab/divergences.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ratelab/stats.hpp"

namespace ratelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_normal_like(Family f) { return f == Family::NormalLocation || f == Family::Normal; }

void require_compatible(const Density& p, const Density& q) {
  p.validate();
  q.validate();
  if (!compatible(p, q))
    throw std::invalid_argument("divergence: incompatible densities " + p.describe() + " vs " +
                                q.describe());
}

struct NormalParams {
  double mu, var;
};

NormalParams as_normal(const Density& d) {
  return {d.a, d.family == Family::NormalLocation ? 1.0 : d.b};
}

// --- numerical integration backends ---------------------------------------
//
// Continuous named families are integrated by the trapezoid rule on a range
// wide enough that the discarded tails are far below the integration error
// (+-12 standard deviations for normals; 60 means for exponentials). Grid
// densities integrate on their own abscissas. Poisson series are truncated
// once both tails drop below 1e-14.

double trapezoid(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  double h = (hi - lo) / static_cast<double>(n - 1);
  double s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < n; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

std::size_t poisson_tail_cut(double lambda) {
  // smallest m with P(X > m) < 1e-14; crude but safe upper bound
  double m = lambda + 12.0 * std::sqrt(lambda) + 25.0;
  return static_cast<std::size_t>(m);
}

double integrate_against_p(const Density& p, const Density& q,
                           const std::function<double(double, double)>& weight) {
  // integral of p(x) * weight(log p(x), log q(x)) over the common space
  auto integrand = [&](double x) {
    double lp = p.log_pdf(x);
    if (lp == -kInf) return 0.0;
    return std::exp(lp) * weight(lp, q.log_pdf(x));
  };
  switch (p.family) {
    case Family::NormalLocation:
    case Family::Normal: {
      auto np = as_normal(p), nq = as_normal(q);
      double sd = std::sqrt(std::max(np.var, nq.var));
      double lo = std::min(np.mu, nq.mu) - 12.0 * sd;
      double hi = std::max(np.mu, nq.mu) + 12.0 * sd;
      return trapezoid(integrand, lo, hi, 8193);
    }
    case Family::Exponential: {
      double hi = 60.0 * std::max(p.a, q.a);
      return trapezoid(integrand, 0.0, hi, 131073);
    }
    case Family::Poisson: {
      std::size_t cut = std::max(poisson_tail_cut(p.a), poisson_tail_cut(q.a));
      double s = 0.0;
      for (std::size_t x = 0; x <= cut; ++x) {
        double lp = p.log_pdf(static_cast<double>(x));
        s += std::exp(lp) * weight(lp, q.log_pdf(static_cast<double>(x)));
      }
      return s;
    }
    case Family::Bernoulli: {
      double s = 0.0;
      for (double x : {0.0, 1.0}) {
        double lp = p.log_pdf(x);
        if (lp == -kInf) continue;
        s += std::exp(lp) * weight(lp, q.log_pdf(x));
      }
      return s;
    }
    case Family::Grid: {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < p.xs.size(); ++i) {
        double fa = p.ys[i] > 0.0 ? p.ys[i] * weight(std::log(p.ys[i]),
                                                     q.ys[i] > 0.0 ? std::log(q.ys[i]) : -kInf)
                                  : 0.0;
        double fb = p.ys[i + 1] > 0.0
                        ? p.ys[i + 1] * weight(std::log(p.ys[i + 1]),
                                               q.ys[i + 1] > 0.0 ? std::log(q.ys[i + 1]) : -kInf)
                        : 0.0;
        s += 0.5 * (fa + fb) * (p.xs[i + 1] - p.xs[i]);
      }
      return s;
    }
  }
  return 0.0;
}

// true when p puts mass where q has none, making log-ratio moments diverge
bool support_escapes(const Density& p, const Density& q) {
  switch (p.family) {
    case Family::Bernoulli:
      if (q.a <= 0.0 && p.a > 0.0) return true;
      if (q.a >= 1.0 && p.a < 1.0) return true;
      return false;
    case Family::Grid:
      for (std::size_t i = 0; i < p.xs.size(); ++i)
        if (p.ys[i] > 0.0 && q.ys[i] <= 0.0) return true;
      return false;
    default:
      return false;  // named continuous families and poisson share full support
  }
}

}  // namespace

double hellinger_sq(const Density& p, const Density& q) {
  require_compatible(p, q);
  if (is_normal_like(p.family)) {
    auto np = as_normal(p), nq = as_normal(q);
    double s2 = np.var + nq.var;
    double bc = std::sqrt(2.0 * std::sqrt(np.var * nq.var) / s2) *
                std::exp(-sqr(np.mu - nq.mu) / (4.0 * s2));
    return 2.0 * (1.0 - bc);
  }
  switch (p.family) {
    case Family::Poisson: {
      double bc = std::exp(-0.5 * sqr(std::sqrt(p.a) - std::sqrt(q.a)));
      return 2.0 * (1.0 - bc);
    }
    case Family::Bernoulli:
      return sqr(std::sqrt(p.a) - std::sqrt(q.a)) +
             sqr(std::sqrt(1.0 - p.a) - std::sqrt(1.0 - q.a));
    case Family::Exponential: {
      double bc = 2.0 * std::sqrt(p.a * q.a) / (p.a + q.a);
      return 2.0 * (1.0 - bc);
    }
    case Family::Grid: {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < p.xs.size(); ++i) {
        double fa = sqr(std::sqrt(p.ys[i]) - std::sqrt(q.ys[i]));
        double fb = sqr(std::sqrt(p.ys[i + 1]) - std::sqrt(q.ys[i + 1]));
        s += 0.5 * (fa + fb) * (p.xs[i + 1] - p.xs[i]);
      }
      return s;
    }
    default:
      throw std::logic_error("hellinger_sq: unhandled family");
  }
}

double kl(const Density& p, const Density& q) {
  require_compatible(p, q);
  if (support_escapes(p, q)) return kInf;
  if (is_normal_like(p.family)) {
    auto np = as_normal(p), nq = as_normal(q);
    return 0.5 * (std::log(nq.var / np.var) + (np.var + sqr(np.mu - nq.mu)) / nq.var - 1.0);
  }
  switch (p.family) {
    case Family::Poisson:
      return p.a * std::log(p.a / q.a) - p.a + q.a;
    case Family::Bernoulli: {
      double s = 0.0;
      if (p.a > 0.0) s += p.a * std::log(p.a / q.a);
      if (p.a < 1.0) s += (1.0 - p.a) * std::log((1.0 - p.a) / (1.0 - q.a));
      return s;
    }
    case Family::Exponential:
      return std::log(q.a / p.a) + p.a / q.a - 1.0;
    case Family::Grid:
      return integrate_against_p(p, q, [](double lp, double lq) { return lp - lq; });
    default:
      throw std::logic_error("kl: unhandled family");
  }
}

double v_k(const Density& p, const Density& q, int k) {
  require_compatible(p, q);
  if (k < 1) throw std::invalid_argument("v_k: order must be >= 1");
  if (support_escapes(p, q)) return kInf;
  if (k == 2) {
    double m = kl(p, q);
    return v_k0(p, q, 2) + m * m;
  }
  return integrate_against_p(
      p, q, [k](double lp, double lq) { return std::pow(std::fabs(lp - lq), k); });
}

double v_k0(const Density& p, const Density& q, int k) {
  require_compatible(p, q);
  if (k < 1) throw std::invalid_argument("v_k0: order must be >= 1");
  if (support_escapes(p, q)) return kInf;
  if (k == 2) {
    // second centered moment of log(p/q) under p, in closed form per family
    if (is_normal_like(p.family)) {
      auto np = as_normal(p), nq = as_normal(q);
      return np.var * sqr(np.mu - nq.mu) / sqr(nq.var) +
             0.5 * sqr(np.var - nq.var) / sqr(nq.var);
    }
    switch (p.family) {
      case Family::Poisson:
        return p.a * sqr(std::log(p.a / q.a));
      case Family::Bernoulli: {
        if (p.a <= 0.0 || p.a >= 1.0) return 0.0;  // degenerate: log-ratio constant a.s.
        double odds = std::log(p.a * (1.0 - q.a) / (q.a * (1.0 - p.a)));
        return p.a * (1.0 - p.a) * sqr(odds);
      }
      case Family::Exponential:
        return sqr(p.a / q.a - 1.0);
      case Family::Grid:
        break;  // fall through to quadrature
      default:
        throw std::logic_error("v_k0: unhandled family");
    }
  }
  double center = kl(p, q);
  return integrate_against_p(p, q, [k, center](double lp, double lq) {
    return std::pow(std::fabs(lp - lq - center), k);
  });
}

double avg_hellinger_dn(const std::vector<ComponentPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("avg_hellinger_dn: no components");
  double s = 0.0;
  for (const auto& pr : pairs) s += hellinger_sq(pr.p, pr.q);
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

bool neighborhood_check(const std::vector<double>& per_component_K,
                        const std::vector<double>& per_component_V, double eps) {
  if (per_component_K.empty() || per_component_K.size() != per_component_V.size())
    throw std::invalid_argument("neighborhood_check: component lists empty or mismatched");
  if (!(eps > 0.0)) throw std::invalid_argument("neighborhood_check: eps must be > 0");
  double e2 = eps * eps;
  return mean(per_component_K) <= e2 && mean(per_component_V) <= e2;
}

}  // namespace ratelab

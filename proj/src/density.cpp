#include "ratelab/density.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ratelab {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(double k) { return std::lgamma(k + 1.0); }
}  // namespace

Density Density::normal_location(double mu) {
  Density d;
  d.family = Family::NormalLocation;
  d.a = mu;
  d.b = 1.0;
  d.validate();
  return d;
}

Density Density::normal(double mu, double var) {
  Density d;
  d.family = Family::Normal;
  d.a = mu;
  d.b = var;
  d.validate();
  return d;
}

Density Density::poisson(double lambda) {
  Density d;
  d.family = Family::Poisson;
  d.a = lambda;
  d.validate();
  return d;
}

Density Density::bernoulli(double p) {
  Density d;
  d.family = Family::Bernoulli;
  d.a = p;
  d.validate();
  return d;
}

Density Density::exponential(double mean) {
  Density d;
  d.family = Family::Exponential;
  d.a = mean;
  d.validate();
  return d;
}

Density Density::grid(std::vector<double> xs, std::vector<double> ys) {
  Density d;
  d.family = Family::Grid;
  d.xs = std::move(xs);
  d.ys = std::move(ys);
  d.validate();
  return d;
}

void Density::validate() const {
  switch (family) {
    case Family::NormalLocation:
      if (!std::isfinite(a)) throw std::invalid_argument("normal-location: mean not finite");
      break;
    case Family::Normal:
      if (!std::isfinite(a) || !(b > 0.0))
        throw std::invalid_argument("normal: need finite mean and variance > 0");
      break;
    case Family::Poisson:
      if (!(a > 0.0)) throw std::invalid_argument("poisson: lambda must be > 0");
      break;
    case Family::Bernoulli:
      if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("bernoulli: p outside [0,1]");
      break;
    case Family::Exponential:
      if (!(a > 0.0)) throw std::invalid_argument("exponential: mean must be > 0");
      break;
    case Family::Grid: {
      if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("grid: need matching abscissas/ordinates, length >= 2");
      for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i + 1] > xs[i])) throw std::invalid_argument("grid: abscissas must increase");
      double mass = 0.0;
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (ys[i] < 0.0 || ys[i + 1] < 0.0)
          throw std::invalid_argument("grid: ordinates must be nonnegative");
        mass += 0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i]);
      }
      if (std::fabs(mass - 1.0) > 1e-6)
        throw std::invalid_argument("grid: trapezoid mass deviates from 1 by more than 1e-6");
      break;
    }
  }
}

double Density::log_pdf(double x) const {
  switch (family) {
    case Family::NormalLocation:
      return -0.5 * std::log(2.0 * M_PI) - 0.5 * (x - a) * (x - a);
    case Family::Normal:
      return -0.5 * std::log(2.0 * M_PI * b) - 0.5 * (x - a) * (x - a) / b;
    case Family::Poisson: {
      double k = std::round(x);
      if (k < 0.0 || std::fabs(k - x) > 1e-9) return kNegInf;
      return -a + k * std::log(a) - log_factorial(k);
    }
    case Family::Bernoulli: {
      double k = std::round(x);
      if (std::fabs(k - x) > 1e-9 || (k != 0.0 && k != 1.0)) return kNegInf;
      double p = (k == 1.0) ? a : 1.0 - a;
      return p > 0.0 ? std::log(p) : kNegInf;
    }
    case Family::Exponential:
      if (x < 0.0) return kNegInf;
      return -std::log(a) - x / a;
    case Family::Grid: {
      if (x < xs.front() || x > xs.back()) return kNegInf;
      // linear interpolation between tabulated ordinates
      auto it = std::lower_bound(xs.begin(), xs.end(), x);
      std::size_t hi = static_cast<std::size_t>(it - xs.begin());
      if (hi == 0) return ys[0] > 0.0 ? std::log(ys[0]) : kNegInf;
      std::size_t lo = hi - 1;
      double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
      double y = ys[lo] * (1.0 - t) + ys[hi] * t;
      return y > 0.0 ? std::log(y) : kNegInf;
    }
  }
  return kNegInf;
}

double Density::pdf(double x) const { return std::exp(log_pdf(x)); }

std::string Density::describe() const {
  std::ostringstream os;
  switch (family) {
    case Family::NormalLocation: os << "normal-location(" << a << ")"; break;
    case Family::Normal: os << "normal(" << a << "," << b << ")"; break;
    case Family::Poisson: os << "poisson(" << a << ")"; break;
    case Family::Bernoulli: os << "bernoulli(" << a << ")"; break;
    case Family::Exponential: os << "exponential(" << a << ")"; break;
    case Family::Grid: os << "grid[" << xs.size() << "]"; break;
  }
  return os.str();
}

Family family_from_string(const std::string& name) {
  if (name == "normal-location") return Family::NormalLocation;
  if (name == "normal") return Family::Normal;
  if (name == "poisson") return Family::Poisson;
  if (name == "bernoulli") return Family::Bernoulli;
  if (name == "exponential") return Family::Exponential;
  if (name == "grid") return Family::Grid;
  throw std::invalid_argument("unknown density family: " + name);
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::NormalLocation: return "normal-location";
    case Family::Normal: return "normal";
    case Family::Poisson: return "poisson";
    case Family::Bernoulli: return "bernoulli";
    case Family::Exponential: return "exponential";
    case Family::Grid: return "grid";
  }
  return "?";
}

bool compatible(const Density& p, const Density& q) {
  if (p.family != q.family) {
    // normal-location is the unit-variance slice of normal; same sample space
    auto is_normal = [](Family f) {
      return f == Family::NormalLocation || f == Family::Normal;
    };
    return is_normal(p.family) && is_normal(q.family);
  }
  if (p.family == Family::Grid) {
    if (p.xs.size() != q.xs.size()) return false;
    for (std::size_t i = 0; i < p.xs.size(); ++i)
      if (p.xs[i] != q.xs[i]) return false;
  }
  return true;
}

}  // namespace ratelab

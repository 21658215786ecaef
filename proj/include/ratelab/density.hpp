#pragma once

#include <string>
#include <vector>

namespace ratelab {

// One-dimensional sampling density. Named parametric families carry their
// parameters; Grid densities are tabulated (abscissas strictly increasing,
// ordinates nonnegative, trapezoid mass 1 within 1e-6).
enum class Family { NormalLocation, Normal, Poisson, Bernoulli, Exponential, Grid };

struct Density {
  Family family = Family::NormalLocation;
  double a = 0.0;  // mean / lambda / p, depending on family
  double b = 1.0;  // variance (Normal only)
  std::vector<double> xs, ys;

  static Density normal_location(double mu);
  static Density normal(double mu, double var);
  static Density poisson(double lambda);
  static Density bernoulli(double p);
  static Density exponential(double mean);
  static Density grid(std::vector<double> xs, std::vector<double> ys);

  bool discrete() const { return family == Family::Poisson || family == Family::Bernoulli; }

  // Log density (continuous) or log mass (discrete) at x. Returns -inf off
  // the support.
  double log_pdf(double x) const;
  double pdf(double x) const;

  // Throws std::invalid_argument when parameters violate the family contract.
  void validate() const;

  std::string describe() const;
};

Family family_from_string(const std::string& name);
std::string family_to_string(Family f);

// Densities are comparable when they live on the same sample space in the
// same representation: identical family, or both Grid with identical
// abscissas.
bool compatible(const Density& p, const Density& q);

}  // namespace ratelab

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ratelab/covering.hpp"
#include "ratelab/priors.hpp"

namespace ratelab::inid {

// --- Poisson regression -------------------------------------------------------

// Squared Hellinger-type discrepancy between the unnormalized Poisson-shaped
// masses x -> e^{-l} m^x / x!, in closed form:
//   (e^{(m1-l1)/2} - e^{(m2-l2)/2})^2
//     + 2 e^{-(l1+l2)/2} (e^{(m1+m2)/2} - e^{sqrt(m1 m2)})
// Reduces to the squared Poisson Hellinger distance when l_i = m_i.
double poisson_generalized_hellinger(double l1, double m1, double l2, double m2);

// Quadratic comparison bound for arguments in [L, U]:
// (1/2 + 1/(4L)) e^{U-L} ((l1-l2)^2 + (m1-m2)^2).
double poisson_generalized_hellinger_bound(double l1, double m1, double l2, double m2,
                                           double L, double U);

// Root average squared Poisson Hellinger distance between two links evaluated
// at the covariates: sqrt((1/n) sum_i 2(1 - e^{-(sqrt lam1_i - sqrt lam2_i)^2/2})).
double poisson_link_distance(const std::vector<double>& lam1, const std::vector<double>& lam2);

// Exact posterior over an enumerated sieve of link staircases under the
// uniform prior (log-space normalization).
struct SievePosterior {
  std::vector<double> log_weights;  // normalized: logsumexp = 0
  std::size_t map_index = 0;
};

SievePosterior sieve_posterior(const PoissonSieve& sieve, const std::vector<double>& z,
                               const std::vector<unsigned>& x);

// Streaming exact posterior summary over the full (non-materialized) sieve:
// enumerates nondecreasing level assignments recursively, accumulating
// per-cell Poisson sufficient statistics and distances to the true link.
struct SieveSummary {
  double radius = 0.0;           // posterior q-quantile of the distance
  double mass_outside_2 = 0.0;   // mass at distance > 2 eps_ref
  double mass_outside_5 = 0.0;
  double mass_outside_r = 0.0;   // mass at distance > report_radius
  double log_size = 0.0;         // log of the sieve cardinality
};

SieveSummary sieve_posterior_summary(const PoissonSieve& sieve, const std::vector<double>& z,
                                     const std::vector<unsigned>& x,
                                     const std::vector<double>& lam0, double quantile,
                                     double eps_ref, double report_radius);

std::vector<unsigned> simulate_poisson(const std::vector<double>& lam, std::mt19937_64& eng);

// --- binary regression with a Dirichlet-process link ---------------------------

// Squared Hellinger distance between Bernoulli(p) and Bernoulli(q): the sum of
// squared root-mass differences over the two outcomes, 2(1 - BC), in [0, 2].
double hellinger_bernoulli(double p, double q);

struct BinaryData {
  std::vector<double> z;
  std::vector<unsigned> y;  // 0/1
};

BinaryData simulate_binary(const std::vector<double>& z,
                           const std::function<double(double)>& H0, std::mt19937_64& eng);

struct BinaryPriorSpec {
  double mass = 1.0;
  double loc_lo = -1.0, loc_hi = 1.0;      // uniform hyperprior on the base location
  double scale_lo = 0.5, scale_hi = 2.0;   // uniform hyperprior on the base scale
};

struct ImportanceSummary {
  double ess = 0.0;
  double radius = 0.0;          // weighted posterior quantile of the distance
  double mass_outside_2 = 0.0;  // weighted mass at distance > 2 eps_ref
  double mass_outside_5 = 0.0;
  bool ess_low = false;         // flagged when ess < 50
  std::size_t draws = 0;
};

// Importance-sampled posterior summary: S prior draws of the link cdf,
// weighted by the Bernoulli likelihood. Distances are measured to H0 in the
// root-average Bernoulli Hellinger metric over the covariates. Empty data
// recovers the prior (uniform weights, zero distances).
ImportanceSummary binary_posterior_is(const BinaryData& data, const BinaryPriorSpec& prior,
                                      const std::function<double(double)>& H0, std::size_t S,
                                      double quantile, double eps_ref, std::mt19937_64& eng);

// Self-normalized likelihood weights (summing to 1) for explicit link draws
// tabulated at the data's covariates: links[s][i] = H_s(z_i). Any posterior
// functional is then a weighted average over draws; used to cross-check the
// sampler above against exact finite-support enumeration.
std::vector<double> binary_is_weights(const BinaryData& data,
                                      const std::vector<std::vector<double>>& links);

// --- parametric grid posteriors --------------------------------------------------

enum class ParametricFamily { NormalLocationScaled, UniformEndpoint };

ParametricFamily parametric_family_from_string(const std::string& name);

struct GridPosterior {
  std::vector<double> theta;
  std::vector<double> weight;   // normalized probabilities
  double boundary_mass = 0.0;   // mass within one mesh of the grid ends
};

// Exact discrete posterior over a uniform prior grid on [lo, hi] with the
// given mesh. For NormalLocationScaled, scales holds the known per-datum
// standard deviations (empty = all 1). Throws when posterior mass within one
// mesh of the boundary exceeds 1e-3 (the grid then fails to contain the
// posterior).
GridPosterior grid_posterior(ParametricFamily family, const std::vector<double>& data,
                             const std::vector<double>& scales, double lo, double hi,
                             double mesh);

// Posterior q-quantile of |theta - theta0|.
double grid_abs_quantile(const GridPosterior& gp, double theta0, double q);

double grid_mass_outside(const GridPosterior& gp, double theta0, double radius);

std::vector<double> simulate_parametric(ParametricFamily family, double theta0,
                                        const std::vector<double>& scales, std::size_t n,
                                        std::mt19937_64& eng);

}  // namespace ratelab::inid

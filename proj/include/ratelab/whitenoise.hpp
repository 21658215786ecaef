#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ratelab/priors.hpp"

namespace ratelab::whitenoise {

// Gaussian sequence experiment: x_i = theta_i + z_i / sqrt(n) observed for
// i = 1..k_max, independent standard normal noise.

std::vector<double> simulate(const std::vector<double>& theta0, std::size_t n,
                             std::mt19937_64& eng);

// Conjugate coordinatewise posterior under the sequence prior (coordinates
// past prior.k are fixed at zero).
struct CoordinatePosterior {
  std::size_t k = 0;
  std::vector<double> mean, var;  // size k
};

CoordinatePosterior posterior(const std::vector<double>& x, std::size_t n,
                              const SequencePrior& prior);

// Joint likelihood-ratio moments of the product experiment between theta0
// and theta: returns {K, V} = {n/2 ||theta-theta0||^2, n ||theta-theta0||^2}.
std::pair<double, double> kl_whitenoise(const std::vector<double>& theta0,
                                        const std::vector<double>& theta, std::size_t n);

// Monte Carlo posterior draws of the l2 distance to theta0. Coordinates in
// (k, k_max] contribute theta0_i^2 deterministically, and truth_tail_sq adds
// the analytic squared contribution past k_max.
std::vector<double> draw_distances(const CoordinatePosterior& post,
                                   const std::vector<double>& theta0, double truth_tail_sq,
                                   std::size_t draws, std::mt19937_64& eng);

// Fraction of posterior draws at distance > radius from theta0.
double posterior_mass_outside(const std::vector<double>& distances, double radius);

// Smallest radius holding posterior fraction >= q of the draws.
double contraction_radius(const std::vector<double>& distances, double q);

// Power-law truth theta0_i = scale * i^-(alpha+1), tabulated to k_max, plus
// its analytic squared tail past k_max.
struct PowerTruth {
  std::vector<double> theta0;
  double tail_sq = 0.0;
};

PowerTruth power_truth(double alpha, double scale, std::size_t k_max);

}  // namespace ratelab::whitenoise

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ratelab::markov {

// First-order autoregression X_i = f(X_{i-1}) + N(0,1) with a regression
// function bounded by M. The two-sided envelope
// r(y) = (phi(y - M) + phi(y + M)) / 2 dominates (up to constants) every
// stationary transition density of the family and integrates to 1.

double envelope_r(double y, double M);

// Chain of n transitions after burn-in, starting the pre-burn-in state at 0.
// Returns n+1 states X_0..X_n.
std::vector<double> simulate_chain(const std::function<double(double)>& f, std::size_t n,
                                   std::size_t burn_in, std::mt19937_64& eng);

// Transition-metric distance between regression functions:
// d^2 = int 2 (1 - exp(-(f1-f2)^2(x)/8)) r(x) dx, by trapezoid on
// [-M-12, M+12].
double transition_distance(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2, double M,
                           std::size_t grid_n = 4097);

// Histogram posterior: heights alpha_k on K bins over [-A, A] with iid
// Uniform[-M, M] prior; the Gaussian transition likelihood factorizes over
// bins, so each bin's posterior is a normal truncated to [-M, M] (empty bins
// keep the flat prior). Transitions leaving from |x| >= A carry no height
// information and are ignored.
struct BinPosterior {
  std::size_t K = 0;
  double A = 0.0, M = 0.0;
  std::vector<std::size_t> count;  // visits per bin
  std::vector<double> mean;        // untruncated posterior mean s_k / m_k
  std::vector<double> sd;          // untruncated posterior sd 1/sqrt(m_k)
};

BinPosterior histogram_posterior(const std::vector<double>& chain, std::size_t K, double A,
                                 double M);

// One posterior draw of the K heights (inverse-cdf truncated normals).
std::vector<double> sample_heights(const BinPosterior& post, std::mt19937_64& eng);

// log of the transition-likelihood ratio p_f0 / p_f1 along the chain,
// conditioning on the initial state (the stationary factor is dropped).
double loglik_ratio(const std::vector<double>& chain, const std::function<double(double)>& f0,
                    const std::function<double(double)>& f1);

// Precomputed envelope moments for fast L2(r) distances between histogram
// heights and a fixed truth: per-bin integrals of r, f0 r, f0^2 r over the
// bins, plus the f0^2 r mass outside [-A, A].
struct TruthMoments {
  std::vector<double> r_mass, f0r, f0sqr;  // size K
  double outside_f0sqr = 0.0;
};

TruthMoments truth_moments(const std::function<double(double)>& f0, std::size_t K, double A,
                           double M, std::size_t grid_n = 8193);

// ||f_alpha - f0||_{L2(r)} for histogram heights alpha.
double l2r_distance(const TruthMoments& tm, const std::vector<double>& heights);

// Long-run occupancy histogram of the chain over [-lo, hi) bins, normalized
// to a density; used to compare against the envelope.
std::vector<double> occupancy_density(const std::vector<double>& chain, double lo, double hi,
                                      std::size_t bins);

}  // namespace ratelab::markov

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratelab/density.hpp"
#include "ratelab/priors.hpp"

namespace ratelab::lrt {

struct TestReport {
  double type1 = 0.0, type1_se = 0.0, type1_bound = 0.0;
  double type2 = 0.0, type2_se = 0.0, type2_bound = 0.0;  // worst alternative
  std::size_t n = 0, replicates = 0;
  double separation = 0.0;  // ||theta1 - theta0|| or the per-observation d_n
  std::string note;
};

// Gaussian sequence test 1{2<theta1 - theta0, X> > ||theta1||^2 - ||theta0||^2}
// under x_i = theta_i + z_i/sqrt(n). Type-I bound 1 - Phi(sqrt(n) D / 2);
// type-II bound 1 - Phi(sqrt(n) D / 4), worst case over alternatives within
// D/4 of theta1 (D = ||theta1 - theta0||).
TestReport whitenoise_lr_test(const std::vector<double>& theta0,
                              const std::vector<double>& theta1, std::size_t n,
                              std::size_t replicates, std::uint64_t seed);

// Likelihood-ratio test 1{sum log(p1/p0)(X_i) >= 0} for an i.i.d. product of
// the given component densities (normal / poisson / bernoulli / exponential).
// Both error rates are bounded by exp(-n h^2(p0, p1) / 2); the worst type-II
// alternative set is {q : h(q, p1) <= h(p0, p1) / 18} probed along the
// parameter line through p0 and p1.
TestReport product_lr_test(const Density& p0, const Density& p1, std::size_t n,
                           std::size_t replicates, std::uint64_t seed);

// --- aggregated shell test ----------------------------------------------------

struct ShellNet {
  std::size_t j = 1;       // shell index: radii in (j eps, (j+1) eps]
  double mesh = 0.0;       // covering mesh used (j eps / 4)
  std::vector<std::vector<double>> points;
};

// Net over shell j around theta0: candidate points sampled uniformly on the
// shell, thinned by a greedy cover at mesh j*eps/4.
ShellNet make_shell_net(const std::vector<double>& theta0, std::size_t j, double eps,
                        std::size_t candidates, std::uint64_t seed);

struct ShellAccount {
  std::size_t j = 0;
  std::size_t net_size = 0;
  double type1_sum = 0.0;    // sum of per-point type-I estimates in this shell
  double type2_max = 0.0;    // worst acceptance rate with the shell's points as truths
  double type2_se = 0.0;
  double type2_bound = 0.0;  // 1 - Phi(sqrt(n) j eps / 4)
};

struct AggregateReport {
  double type1_direct = 0.0;  // MC rate of the max-test rejecting under theta0
  double type1_se = 0.0;
  double type1_sum = 0.0;     // union-bound accounting: sum over all points
  double series_bound = 0.0;  // N_max e^{-K n eps^2} / (1 - e^{-K n eps^2})
  double K = 0.0;
  std::size_t n = 0, replicates = 0;
  double eps = 0.0;
  std::vector<ShellAccount> shells;
};

// Maximum of the per-point sequence tests over all shell nets. K defaults to
// 9/512: with net centers at distance >= (3/4) j eps from theta0, both error
// exponents exp(-n D^2/8) and exp(-n D^2/32) are at most exp(-K n j^2 eps^2).
AggregateReport aggregate_whitenoise_test(const std::vector<double>& theta0,
                                          const std::vector<ShellNet>& nets, std::size_t n,
                                          double eps, std::size_t replicates,
                                          std::uint64_t seed, double K = 9.0 / 512.0);

// --- evidence lower bound ------------------------------------------------------

struct EvidenceReport {
  double freq = 0.0;     // empirical frequency of the small-evidence event
  double se = 0.0;
  double bound = 0.0;    // C^{-k} (n eps^2)^{-k/2}
  double threshold = 0.0;  // log cutoff -(1+C) n eps^2
  double accept_rate = 0.0;  // rejection-sampling acceptance building the support
  std::size_t support_size = 0;
  std::size_t n = 0, replicates = 0;
  double eps = 0.0, C = 0.0;
  double k = 0.0;
};

// k-th absolute moment of a standard normal, 2^{k/2} Gamma((k+1)/2)/sqrt(pi).
double normal_abs_moment(double k);

// Sequence-model norm radius equivalent to the KL/moment neighborhood used by
// the evidence bound: ||theta - theta0|| <= eps * min(sqrt(2), m_k^{-1/k}).
double evidence_membership_radius(double eps, double k);

// Frequency of { mean_s exp(log LR_s) <= e^{-(1+C) n eps^2} } under theta0,
// with the mixing measure the empirical distribution of `support` draws from
// the prior rejected into the neighborhood. Exact log likelihood ratios.
EvidenceReport evidence_bound_check(const std::vector<double>& theta0,
                                    const SequencePrior& prior, double C, double k,
                                    std::size_t n, double eps, std::size_t support,
                                    std::size_t replicates, std::uint64_t seed);

}  // namespace ratelab::lrt

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace ratelab::spline {

// B-spline basis of order q (degree q-1) on (0,1] with K equal knot
// intervals; J = q + K - 1 basis functions. Endpoint knots are repeated q
// times so the basis spans all polynomials of degree < q on the interval.
struct Basis {
  int order = 1;  // q >= 1
  int knots = 1;  // K >= 1
  int J() const { return order + knots - 1; }
  void validate() const;
};

// The q basis values that are allowed to be nonzero at x, plus the index of
// the first one. Values outside [0,1] are rejected.
struct LocalValues {
  int first = 0;
  std::vector<double> values;  // length q
};

LocalValues basis_local(const Basis& basis, double x);

// Full-length basis vector (J entries), mostly zeros.
std::vector<double> basis_values(const Basis& basis, double x);

// Empirical Gram matrix Sigma_n = (1/n) sum B(z_i) B(z_i)^T plus its extreme
// eigenvalues scaled by J (which stay in a fixed band for equispaced
// designs).
struct GramReport {
  Eigen::MatrixXd sigma;
  double lam_min_times_J = 0.0;
  double lam_max_times_J = 0.0;
};

GramReport design_gram(const Basis& basis, const std::vector<double>& z);

// Conjugate posterior for y = B beta + N(0, sigma^2 I) under beta ~ N(0, I):
// cov = (B^T B / sigma^2 + I)^{-1}, mean = cov B^T y / sigma^2.
struct BetaPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

BetaPosterior posterior_beta(const Basis& basis, const std::vector<double>& z,
                             const std::vector<double>& y, double sigma);

// sqrt(J) ||f_b1 - f_b2||_n / ||b1 - b2||: the norm-equivalence ratio of the
// design, bounded by the root Gram eigenvalue band.
double empirical_norm_ratio(const GramReport& gram, const Eigen::VectorXd& b1,
                            const Eigen::VectorXd& b2);

// Sup error on a fine grid of the least-squares projection of f0 onto the
// basis (projection in the grid's discrete L2 sense).
double approx_error_sup(const Basis& basis, const std::function<double(double)>& f0,
                        std::size_t fine_grid);

// Posterior draws of the empirical distance ||f_beta - f0||_n, computed with
// the precomputed Gram identity (O(J^2) per draw).
std::vector<double> draw_distances(const BetaPosterior& post, const GramReport& gram,
                                   const Eigen::VectorXd& cross, double f0_norm_sq,
                                   std::size_t draws, std::mt19937_64& eng);

// cross = (1/n) B^T f0(z), f0_norm_sq = (1/n) sum f0(z_i)^2, for the
// distance identity above.
struct TruthProjection {
  Eigen::VectorXd cross;
  double f0_norm_sq = 0.0;
};

TruthProjection project_truth(const Basis& basis, const std::vector<double>& z,
                              const std::function<double(double)>& f0);

}  // namespace ratelab::spline

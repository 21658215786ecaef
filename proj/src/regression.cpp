#include "ratelab/regression.hpp"

#include <cmath>
#include <stdexcept>

#include "ratelab/stats.hpp"

namespace ratelab::spline {

void Basis::validate() const {
  if (order < 1) throw std::invalid_argument("spline basis: order must be >= 1");
  if (knots < 1) throw std::invalid_argument("spline basis: need >= 1 knot interval");
}

namespace {

// knot t_i for the open uniform vector: order copies of 0 and 1 at the ends,
// interior knots j/K. Index range 0..J+order-1.
double knot(const Basis& b, int i) {
  int p = b.order - 1;  // degree
  if (i <= p) return 0.0;
  if (i >= b.J()) return 1.0;
  return static_cast<double>(i - p) / static_cast<double>(b.knots);
}

}  // namespace

LocalValues basis_local(const Basis& basis, double x) {
  basis.validate();
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("basis_local: x outside [0,1]");
  const int p = basis.order - 1;
  const int K = basis.knots;
  // interval index: x in ((mu-p)/K, (mu-p+1)/K] with mu in [p, J-1]
  int cell = static_cast<int>(std::ceil(x * K)) - 1;
  if (cell < 0) cell = 0;  // x == 0 belongs to the first interval's closure
  if (cell > K - 1) cell = K - 1;
  int mu = cell + p;

  // de Boor triangular recursion for the p+1 nonzero functions at x
  std::vector<double> N(basis.order, 0.0);
  N[0] = 1.0;
  std::vector<double> left(basis.order), right(basis.order);
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knot(basis, mu + 1 - j);
    right[j] = knot(basis, mu + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double denom = right[r + 1] + left[j - r];
      double term = denom > 0.0 ? N[r] / denom : 0.0;
      N[r] = saved + right[r + 1] * term;
      saved = left[j - r] * term;
    }
    N[j] = saved;
  }
  LocalValues out;
  out.first = mu - p;
  out.values = std::move(N);
  return out;
}

std::vector<double> basis_values(const Basis& basis, double x) {
  LocalValues lv = basis_local(basis, x);
  std::vector<double> full(static_cast<std::size_t>(basis.J()), 0.0);
  for (int r = 0; r < basis.order; ++r)
    full[static_cast<std::size_t>(lv.first + r)] = lv.values[static_cast<std::size_t>(r)];
  return full;
}

GramReport design_gram(const Basis& basis, const std::vector<double>& z) {
  basis.validate();
  if (z.empty()) throw std::invalid_argument("design_gram: empty design");
  const int J = basis.J();
  GramReport rep;
  rep.sigma = Eigen::MatrixXd::Zero(J, J);
  for (double zi : z) {
    LocalValues lv = basis_local(basis, zi);
    for (int r = 0; r < basis.order; ++r)
      for (int c = 0; c < basis.order; ++c)
        rep.sigma(lv.first + r, lv.first + c) += lv.values[r] * lv.values[c];
  }
  rep.sigma /= static_cast<double>(z.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.sigma);
  rep.lam_min_times_J = es.eigenvalues().minCoeff() * J;
  rep.lam_max_times_J = es.eigenvalues().maxCoeff() * J;
  return rep;
}

BetaPosterior posterior_beta(const Basis& basis, const std::vector<double>& z,
                             const std::vector<double>& y, double sigma) {
  basis.validate();
  if (z.size() != y.size() || z.empty())
    throw std::invalid_argument("posterior_beta: design/response mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("posterior_beta: sigma must be > 0");
  const int J = basis.J();
  Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(J, J);
  Eigen::VectorXd bty = Eigen::VectorXd::Zero(J);
  for (std::size_t i = 0; i < z.size(); ++i) {
    LocalValues lv = basis_local(basis, z[i]);
    for (int r = 0; r < basis.order; ++r) {
      bty(lv.first + r) += lv.values[r] * y[i];
      for (int c = 0; c < basis.order; ++c)
        btb(lv.first + r, lv.first + c) += lv.values[r] * lv.values[c];
    }
  }
  double s2 = sigma * sigma;
  Eigen::MatrixXd precision = btb / s2 + Eigen::MatrixXd::Identity(J, J);
  BetaPosterior post;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("posterior_beta: precision not positive definite");
  post.cov = llt.solve(Eigen::MatrixXd::Identity(J, J));
  post.mean = post.cov * (bty / s2);
  return post;
}

double empirical_norm_ratio(const GramReport& gram, const Eigen::VectorXd& b1,
                            const Eigen::VectorXd& b2) {
  Eigen::VectorXd d = b1 - b2;
  double nb = d.norm();
  if (nb == 0.0) throw std::invalid_argument("empirical_norm_ratio: identical coefficients");
  double fn = std::sqrt(d.dot(gram.sigma * d));
  double J = static_cast<double>(gram.sigma.rows());
  return std::sqrt(J) * fn / nb;
}

double approx_error_sup(const Basis& basis, const std::function<double(double)>& f0,
                        std::size_t fine_grid) {
  basis.validate();
  if (fine_grid < static_cast<std::size_t>(basis.J()) * 4)
    throw std::invalid_argument("approx_error_sup: grid too coarse for the basis");
  const int J = basis.J();
  Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(J, J);
  Eigen::VectorXd btf = Eigen::VectorXd::Zero(J);
  std::vector<double> xs(fine_grid), fs(fine_grid);
  for (std::size_t i = 0; i < fine_grid; ++i) {
    xs[i] = static_cast<double>(i) / static_cast<double>(fine_grid - 1);
    fs[i] = f0(xs[i]);
    LocalValues lv = basis_local(basis, xs[i]);
    for (int r = 0; r < basis.order; ++r) {
      btf(lv.first + r) += lv.values[r] * fs[i];
      for (int c = 0; c < basis.order; ++c)
        btb(lv.first + r, lv.first + c) += lv.values[r] * lv.values[c];
    }
  }
  Eigen::VectorXd beta = btb.ldlt().solve(btf);
  double sup = 0.0;
  for (std::size_t i = 0; i < fine_grid; ++i) {
    LocalValues lv = basis_local(basis, xs[i]);
    double fit = 0.0;
    for (int r = 0; r < basis.order; ++r) fit += lv.values[r] * beta(lv.first + r);
    sup = std::max(sup, std::fabs(fit - fs[i]));
  }
  return sup;
}

TruthProjection project_truth(const Basis& basis, const std::vector<double>& z,
                              const std::function<double(double)>& f0) {
  basis.validate();
  if (z.empty()) throw std::invalid_argument("project_truth: empty design");
  const int J = basis.J();
  TruthProjection tp;
  tp.cross = Eigen::VectorXd::Zero(J);
  for (double zi : z) {
    double f = f0(zi);
    tp.f0_norm_sq += f * f;
    LocalValues lv = basis_local(basis, zi);
    for (int r = 0; r < basis.order; ++r) tp.cross(lv.first + r) += lv.values[r] * f;
  }
  double n = static_cast<double>(z.size());
  tp.cross /= n;
  tp.f0_norm_sq /= n;
  return tp;
}

std::vector<double> draw_distances(const BetaPosterior& post, const GramReport& gram,
                                   const Eigen::VectorXd& cross, double f0_norm_sq,
                                   std::size_t draws, std::mt19937_64& eng) {
  const Eigen::Index J = post.mean.size();
  if (gram.sigma.rows() != J || cross.size() != J)
    throw std::invalid_argument("draw_distances: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(post.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("draw_distances: covariance not positive definite");
  Eigen::MatrixXd root = llt.matrixL();
  std::normal_distribution<double> zdist(0.0, 1.0);
  std::vector<double> out(draws);
  Eigen::VectorXd zvec(J), beta(J);
  for (std::size_t d = 0; d < draws; ++d) {
    for (Eigen::Index i = 0; i < J; ++i) zvec(i) = zdist(eng);
    beta = post.mean + root * zvec;
    // ||f_beta - f0||_n^2 = beta' Sigma beta - 2 beta' cross + ||f0||_n^2
    double sq = beta.dot(gram.sigma * beta) - 2.0 * beta.dot(cross) + f0_norm_sq;
    out[d] = std::sqrt(std::max(0.0, sq));
  }
  return out;
}

}  // namespace ratelab::spline

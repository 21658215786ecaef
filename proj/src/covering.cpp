#include "ratelab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ratelab {

namespace {

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

void PointCloud::validate() const {
  if (points.empty()) throw std::invalid_argument("point cloud: empty");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw std::invalid_argument("point cloud: zero-dimensional points");
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("point cloud: ragged dimensions");
  if (metric == Metric::L2Empirical) {
    if (weights.size() != dim)
      throw std::invalid_argument("point cloud: L2-empirical metric needs one weight per coordinate");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("point cloud: negative weight");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-6)
      throw std::invalid_argument("point cloud: empirical weights must sum to 1");
  }
}

double PointCloud::distance(std::size_t i, std::size_t j) const {
  const auto& a = points[i];
  const auto& b = points[j];
  switch (metric) {
    case Metric::Euclidean: {
      double s = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
      return std::sqrt(s);
    }
    case Metric::SupTabulated: {
      double m = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::fabs(a[c] - b[c]));
      return m;
    }
    case Metric::L2Empirical: {
      double s = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) s += weights[c] * (a[c] - b[c]) * (a[c] - b[c]);
      return std::sqrt(s);
    }
  }
  return 0.0;
}

std::vector<std::size_t> greedy_cover(const PointCloud& cloud, double eps) {
  cloud.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("greedy_cover: eps must be > 0");
  const std::size_t n = cloud.points.size();
  std::vector<std::size_t> centers{0};
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = cloud.distance(0, i);
  for (;;) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (nearest[i] > nearest[far]) far = i;  // strict: ties keep lowest index
    if (nearest[far] <= eps) break;
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], cloud.distance(far, i));
  }
  return centers;
}

std::size_t cover_interval(double eps, double a, double b) {
  if (!(eps > 0.0)) throw std::invalid_argument("cover_interval: eps must be > 0");
  if (!(b >= a)) throw std::invalid_argument("cover_interval: b < a");
  double need = std::ceil((b - a) / (2.0 * eps));
  return need < 1.0 ? 1 : static_cast<std::size_t>(need);
}

double euclidean_ball_cover_bound(std::size_t d, double R, double eps) {
  if (d == 0 || !(R > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("euclidean_ball_cover_bound: need d >= 1, R > 0, eps > 0");
  if (eps >= R) return 0.0;
  return static_cast<double>(d) * std::log(3.0 * R / eps);
}

double simplex_entropy_bound(std::size_t k, double eps) {
  if (k < 1) throw std::invalid_argument("simplex_entropy_bound: need k >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("simplex_entropy_bound: need eps > 0");
  double kd = static_cast<double>(k);
  return kd * std::log(kd) + kd * std::log(1.0 / eps);
}

// --- monotone class ---------------------------------------------------------

MonotoneEntropyReport monotone_class_entropy(double eps, std::size_t grid_size,
                                             std::size_t enumerate_cap) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("monotone_class_entropy: eps outside (0,1]");
  if (grid_size == 0) throw std::invalid_argument("monotone_class_entropy: empty grid");

  MonotoneEntropyReport rep;
  rep.eps = eps;
  rep.grid_size = grid_size;
  rep.levels = static_cast<std::size_t>(std::ceil(1.0 / eps));
  const std::size_t v = rep.levels;
  rep.log_count = log_binomial(grid_size + v - 1, grid_size);

  if (rep.log_count <= std::log(static_cast<double>(enumerate_cap))) {
    rep.enumerated = true;
    const double mesh = 1.0 / static_cast<double>(v);
    std::vector<std::size_t> bins(grid_size, 0);
    // enumerate nondecreasing bin sequences in lexicographic order
    for (;;) {
      MonotoneBracket br;
      br.lower.resize(grid_size);
      br.upper.resize(grid_size);
      for (std::size_t i = 0; i < grid_size; ++i) {
        br.lower[i] = mesh * static_cast<double>(bins[i]);
        br.upper[i] = std::min(1.0, mesh * static_cast<double>(bins[i] + 1));
      }
      rep.brackets.push_back(std::move(br));
      // advance: find rightmost position that can still increase
      std::size_t pos = grid_size;
      while (pos > 0 && bins[pos - 1] == v - 1) --pos;
      if (pos == 0) break;
      ++bins[pos - 1];
      for (std::size_t i = pos; i < grid_size; ++i) bins[i] = bins[pos - 1];
    }
  }
  return rep;
}

MonotoneBracket locate_bracket(const MonotoneEntropyReport& rep,
                               const std::vector<double>& cdf_values) {
  if (cdf_values.size() != rep.grid_size)
    throw std::invalid_argument("locate_bracket: cdf length mismatch");
  const double mesh = 1.0 / static_cast<double>(rep.levels);
  MonotoneBracket br;
  br.lower.resize(rep.grid_size);
  br.upper.resize(rep.grid_size);
  double prev = -1.0;
  for (std::size_t i = 0; i < rep.grid_size; ++i) {
    double f = cdf_values[i];
    if (f < 0.0 || f > 1.0 || f < prev)
      throw std::invalid_argument("locate_bracket: values must be monotone into [0,1]");
    prev = f;
    auto bin = static_cast<std::size_t>(std::min(std::floor(f / mesh),
                                                 static_cast<double>(rep.levels - 1)));
    br.lower[i] = mesh * static_cast<double>(bin);
    br.upper[i] = std::min(1.0, mesh * static_cast<double>(bin + 1));
  }
  return br;
}

// --- Poisson link sieve ------------------------------------------------------

std::size_t PoissonSieve::cell_of(double z) const {
  if (z <= cell_edges.front()) return 0;
  if (z >= cell_edges.back()) return cells - 1;
  auto it = std::upper_bound(cell_edges.begin(), cell_edges.end(), z);
  std::size_t idx = static_cast<std::size_t>(it - cell_edges.begin());
  return std::min(idx - 1, cells - 1);
}

std::vector<double> PoissonSieve::upper_bracket(const std::vector<double>& z,
                                                const std::vector<double>& link_values) const {
  if (z.size() != link_values.size())
    throw std::invalid_argument("upper_bracket: covariate/value length mismatch");
  std::vector<double> per_cell(cells, levels.front());
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::size_t c = cell_of(z[i]);
    per_cell[c] = std::max(per_cell[c], link_values[i]);
  }
  // round each cell maximum up to the next level, then enforce monotonicity
  double running = levels.front();
  for (std::size_t c = 0; c < cells; ++c) {
    auto it = std::lower_bound(levels.begin(), levels.end(), per_cell[c] - 1e-12);
    double up = (it == levels.end()) ? levels.back() : *it;
    running = std::max(running, up);
    per_cell[c] = running;
  }
  return per_cell;
}

PoissonSieve poisson_bracketing(double eps, double L, double U,
                                const std::vector<double>& covariates,
                                std::size_t enumerate_cap) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("poisson_bracketing: eps outside (0,1]");
  if (!(U > L) || !(L > 0.0))
    throw std::invalid_argument("poisson_bracketing: need 0 < L < U");
  if (covariates.size() < 2) throw std::invalid_argument("poisson_bracketing: need >= 2 covariates");

  PoissonSieve s;
  s.eps = eps;
  s.L = L;
  s.U = U;
  s.cells = static_cast<std::size_t>(std::ceil(1.0 / eps));
  s.value_mesh = eps * (U - L) / std::sqrt(2.0);

  auto [lo_it, hi_it] = std::minmax_element(covariates.begin(), covariates.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("poisson_bracketing: degenerate covariate range");
  s.cell_edges.resize(s.cells + 1);
  for (std::size_t c = 0; c <= s.cells; ++c)
    s.cell_edges[c] = lo + (hi - lo) * static_cast<double>(c) / static_cast<double>(s.cells);

  if (eps >= 1.0) {
    // bracketing scale as coarse as the whole value band: the constant-U
    // staircase alone dominates every admissible link within the error budget
    s.levels = {U};
    s.level_count = 1;
    s.log_count = 0.0;
    s.enumerated = true;
    s.links = {std::vector<double>(s.cells, U)};
    return s;
  }

  for (double v = L; v < U + s.value_mesh * 0.5; v += s.value_mesh) s.levels.push_back(v);
  if (s.levels.back() < U) s.levels.push_back(U);
  s.level_count = s.levels.size();

  s.log_count = log_binomial(s.cells + s.level_count - 1, s.cells);

  if (s.log_count <= std::log(static_cast<double>(enumerate_cap))) {
    s.enumerated = true;
    std::vector<std::size_t> idx(s.cells, 0);
    for (;;) {
      std::vector<double> link(s.cells);
      for (std::size_t c = 0; c < s.cells; ++c) link[c] = s.levels[idx[c]];
      s.links.push_back(std::move(link));
      std::size_t pos = s.cells;
      while (pos > 0 && idx[pos - 1] == s.level_count - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < s.cells; ++i) idx[i] = idx[pos - 1];
    }
  }
  return s;
}

}  // namespace ratelab

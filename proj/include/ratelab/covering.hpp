#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ratelab {

// Finite point cloud with one of three metrics. Points are coordinate
// vectors of equal length; for SupTabulated and L2Empirical they are read as
// tabulated function values. L2Empirical weights define the empirical
// measure (nonnegative, summing to ~1).
struct PointCloud {
  enum class Metric { Euclidean, SupTabulated, L2Empirical };

  Metric metric = Metric::Euclidean;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;  // L2Empirical only

  double distance(std::size_t i, std::size_t j) const;
  void validate() const;
};

// Farthest-first traversal: the first center is point 0, each subsequent
// center is the point farthest from the chosen set, ties broken by lowest
// index, stopping once every point lies within eps of a center. Returns
// center indices in selection order. Deterministic for fixed input.
std::vector<std::size_t> greedy_cover(const PointCloud& cloud, double eps);

// Minimal number of eps-balls covering [a,b]: ceil((b-a)/(2 eps)), at least 1.
std::size_t cover_interval(double eps, double a, double b);

// log N(eps, ball(R), ||.||) <= d log(3R/eps); zero when a single ball
// suffices (eps >= R).
double euclidean_ball_cover_bound(std::size_t d, double R, double eps);

// k log k + k log(1/eps): log covering count of the unit simplex in L1.
double simplex_entropy_bound(std::size_t k, double eps);

// --- monotone function class, values in [0,1] ------------------------------
//
// Brackets quantize values to v = ceil(1/eps) levels at every grid point, so
// each bracket is a pair of monotone staircases with l <= F <= u and
// pointwise gap exactly 1/v <= eps (RMS gap likewise). The family is indexed
// by the nondecreasing level sequence; its cardinality is
// C(grid_size + v - 1, grid_size), reported in logs. Bracket lists are
// materialized only when the count is at most enumerate_cap.

struct MonotoneBracket {
  std::vector<double> lower, upper;
};

struct MonotoneEntropyReport {
  double eps = 0.0;
  std::size_t grid_size = 0;
  std::size_t levels = 0;      // v
  double log_count = 0.0;
  bool enumerated = false;
  std::vector<MonotoneBracket> brackets;
};

MonotoneEntropyReport monotone_class_entropy(double eps, std::size_t grid_size,
                                             std::size_t enumerate_cap = 4096);

// Bracket containing a given monotone cdf tabulated on the grid.
MonotoneBracket locate_bracket(const MonotoneEntropyReport& rep,
                               const std::vector<double>& cdf_values);

// --- monotone links into [L,U] for Poisson regression -----------------------
//
// Upper brackets for monotone link functions: jump locations restricted to
// cells = ceil(1/eps) equal-width cells over the covariate range, values
// quantized upward to mesh delta = eps (U - L) / sqrt(2). Every monotone
// link is dominated pointwise by its bracket; the L2(P_n) gap is at most
// eps (U - L) whenever the link's variation within each single cell stays
// below the value mesh (concentrated jumps can exceed it, which the reported
// log-count trades for linear-in-1/eps growth).

struct PoissonSieve {
  double eps = 0.0;  // relative to U - L
  double L = 0.0, U = 1.0;
  std::size_t cells = 0;
  std::size_t level_count = 0;          // distinct staircase values
  double value_mesh = 0.0;              // eps (U-L)/sqrt(2)
  std::vector<double> cell_edges;       // cells+1 edges over the covariate range
  std::vector<double> levels;           // L, L+mesh, ..., >= U
  double log_count = 0.0;               // log C(cells + level_count - 1, cells)
  bool enumerated = false;
  std::vector<std::vector<double>> links;  // per-cell staircase values, when small

  std::size_t cell_of(double z) const;
  // Upper bracket of the link with the given values at the covariates used
  // to build the sieve (values must be monotone nondecreasing in z order).
  std::vector<double> upper_bracket(const std::vector<double>& z,
                                    const std::vector<double>& link_values) const;
  double level_at(std::size_t cell, const std::vector<double>& per_cell) const {
    return per_cell[cell];
  }
};

PoissonSieve poisson_bracketing(double eps, double L, double U,
                                const std::vector<double>& covariates,
                                std::size_t enumerate_cap = 200000);

// Report consumed by the `cover` CLI subcommand.
struct CoverReport {
  std::string cls;
  double eps = 0.0;
  double count = 0.0;       // achieved cover size (when enumerable)
  double log_count = 0.0;
  double log_bound = 0.0;   // theoretical comparator, 0 if none applies
  std::string note;
};

}  // namespace ratelab

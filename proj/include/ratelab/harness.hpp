#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ratelab::harness {

// A contraction experiment: one model, a grid of sample sizes, R replicates
// per n, one posterior summary row per (n, replicate).
struct ExperimentConfig {
  std::string model;
  nlohmann::json model_config = nlohmann::json::object();
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 5;
  std::size_t posterior_draws = 2000;
  double quantile = 0.9;
  std::uint64_t seed = 1;
  double exponent_tolerance = 0.0;  // 0 -> per-model default
  bool timing = false;              // off by default so reruns are byte-identical
  std::size_t workers = 1;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

struct ResultRow {
  std::string model;
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double quantile = 0.0;
  double radius = 0.0;
  double mass_outside_2eps = 0.0;
  double mass_outside_5eps = 0.0;
  double ess = 0.0;
  double elapsed_ms = 0.0;
  std::string status = "ok";  // "ok", "low-ess", or "error: ..."

  bool usable() const { return status == "ok" || status == "low-ess"; }
};

// What one model replicate reports back to the harness.
struct ReplicateOutcome {
  double radius = 0.0;
  double mass_outside_2eps = 0.0;
  double mass_outside_5eps = 0.0;
  double ess = 0.0;
  bool low_ess = false;
};

struct TheoreticalRate {
  double exponent = 0.0;   // radius ~ n^exponent (log n)^log_power
  double log_power = 0.0;
};

// --- model registry (implemented in models.cpp) ---
bool model_known(const std::string& id);
std::vector<std::string> model_ids();
TheoreticalRate theoretical_rate(const std::string& model, const nlohmann::json& params);
double default_tolerance(const std::string& model, const nlohmann::json& params);
// Reference radius eps_ref(n) used for the mass_outside columns:
// eps_scale * n^exponent * (log n)^log_power.
double eps_reference(const std::string& model, const nlohmann::json& params, std::size_t n);
ReplicateOutcome run_model_replicate(const ExperimentConfig& cfg, std::size_t n,
                                     std::uint64_t seed);

// --- orchestration ---
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
std::vector<ResultRow> rows_from_csv_file(const std::string& path);

// Single-column CSV with the given header (used for covariate / series input).
std::vector<double> read_column_csv(const std::string& path, const std::string& header);

struct NSummary {
  std::size_t n = 0;
  double median_radius = 0.0;
  double mean_radius = 0.0;
  double median_mass2 = 0.0;
  double median_mass5 = 0.0;
  std::size_t rows_ok = 0;
  std::size_t rows_total = 0;
  std::size_t ess_at_least_50 = 0;
};
std::vector<NSummary> summarize(const std::vector<ResultRow>& rows);

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double log_coeff = 0.0;  // meaningful only when has_log_term
  bool has_log_term = false;
  double ci_lo = 0.0;  // bootstrap 90% interval, always containing the estimate
  double ci_hi = 0.0;
  double residual_rms = 0.0;
  std::size_t points_used = 0;
  bool dropped_smallest_n = false;
};

// OLS of log(median radius) on log n (optionally + log log n), bootstrap CI
// over replicates.  Drops the smallest n by default (transient regime) when
// at least four distinct n remain usable.
RateFit fit_rate(const std::vector<ResultRow>& rows, bool with_log_term,
                 bool include_smallest = false);

struct Verdict {
  std::string verdict;  // PASS / FAIL / INCONCLUSIVE
  double theory_exponent = 0.0;
  double theory_log_power = 0.0;
  double tolerance = 0.0;
  std::string note;
};
Verdict compare_rate(const RateFit& fit, double theory_exponent, double theory_log_power,
                     double tolerance);

nlohmann::json fit_to_json(const RateFit& fit, const Verdict* verdict);
nlohmann::json report_json(const std::vector<ResultRow>& rows, const std::string& model,
                           const nlohmann::json& params, double tolerance_override = 0.0);

}  // namespace ratelab::harness

#include "ratelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ratelab/rng.hpp"
#include "ratelab/stats.hpp"

namespace ratelab::harness {

namespace {

const char* kCsvHeader =
    "model,n,replicate,seed,quantile,radius,mass_outside_2eps,mass_outside_5eps,ess,"
    "elapsed_ms,status";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Status strings land in a comma-separated file; strip the separators.
std::string sanitize_status(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  if (s.size() > 160) s.resize(160);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!model_known(model)) throw std::invalid_argument("unknown model id: " + model);
  if (n_grid.empty()) throw std::invalid_argument("n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw std::invalid_argument("n_grid entries must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("n_grid must be strictly increasing");
  }
  if (replicates < 5) throw std::invalid_argument("replicates must be >= 5");
  if (posterior_draws < 1) throw std::invalid_argument("posterior_draws must be >= 1");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("quantile must lie in (0,1)");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (exponent_tolerance < 0.0) throw std::invalid_argument("tolerance must be >= 0");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known = {
      "model",     "model_config",    "n_grid", "replicates", "posterior_draws",
      "quantile",  "seed",            "timing", "workers",    "tolerances",
      "out"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("unknown config key: " + it.key());

  ExperimentConfig cfg;
  cfg.model = j.at("model").get<std::string>();
  if (j.contains("model_config")) {
    if (!j["model_config"].is_object())
      throw std::invalid_argument("model_config must be an object");
    cfg.model_config = j["model_config"];
  }
  cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  if (j.contains("replicates")) cfg.replicates = j["replicates"].get<std::size_t>();
  if (j.contains("posterior_draws"))
    cfg.posterior_draws = j["posterior_draws"].get<std::size_t>();
  if (j.contains("quantile")) cfg.quantile = j["quantile"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("timing")) cfg.timing = j["timing"].get<bool>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.is_number())
      cfg.exponent_tolerance = t.get<double>();
    else if (t.is_object() && t.contains("exponent"))
      cfg.exponent_tolerance = t["exponent"].get<double>();
    else if (!t.is_object())
      throw std::invalid_argument("tolerances must be a number or {\"exponent\": ...}");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_count = cfg.n_grid.size();
  const std::size_t total = n_count * cfg.replicates;
  std::vector<ResultRow> rows(total);

  auto run_task = [&](std::size_t task) {
    const std::size_t ni = task / cfg.replicates;
    const std::size_t rep = task % cfg.replicates;
    const std::size_t n = cfg.n_grid[ni];
    ResultRow& row = rows[task];
    row.model = cfg.model;
    row.n = n;
    row.replicate = rep;
    row.seed = derive_seed(cfg.seed, cfg.model, static_cast<std::uint64_t>(ni),
                           static_cast<std::uint64_t>(rep));
    row.quantile = cfg.quantile;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ReplicateOutcome out = run_model_replicate(cfg, n, row.seed);
      row.radius = out.radius;
      row.mass_outside_2eps = out.mass_outside_2eps;
      row.mass_outside_5eps = out.mass_outside_5eps;
      row.ess = out.ess;
      row.status = out.low_ess ? "low-ess" : "ok";
    } catch (const std::exception& e) {
      row.radius = row.mass_outside_2eps = row.mass_outside_5eps = row.ess = 0.0;
      row.status = sanitize_status(std::string("error: ") + e.what());
    }
    if (cfg.timing) {
      const auto t1 = std::chrono::steady_clock::now();
      row.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  };

  const std::size_t workers = std::min(cfg.workers, total);
  if (workers <= 1) {
    for (std::size_t task = 0; task < total; ++task) run_task(task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t task = next.fetch_add(1);
          if (task >= total) return;
          run_task(task);
        }
      });
    for (auto& t : pool) t.join();
  }
  return rows;  // already in canonical (n, replicate) order
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const ResultRow& r : rows) {
    out += r.model;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt_double(r.quantile);
    out += ',';
    out += fmt_double(r.radius);
    out += ',';
    out += fmt_double(r.mass_outside_2eps);
    out += ',';
    out += fmt_double(r.mass_outside_5eps);
    out += ',';
    out += fmt_double(r.ess);
    out += ',';
    out += fmt_double(r.elapsed_ms);
    out += ',';
    out += r.status;
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("unexpected results header: " + line);
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11)
      throw std::runtime_error("results line " + std::to_string(lineno) + ": expected 11 fields");
    ResultRow r;
    try {
      r.model = f[0];
      r.n = std::stoull(f[1]);
      r.replicate = std::stoull(f[2]);
      r.seed = std::stoull(f[3]);
      r.quantile = std::stod(f[4]);
      r.radius = std::stod(f[5]);
      r.mass_outside_2eps = std::stod(f[6]);
      r.mass_outside_5eps = std::stod(f[7]);
      r.ess = std::stod(f[8]);
      r.elapsed_ms = std::stod(f[9]);
      r.status = f[10];
    } catch (const std::exception&) {
      throw std::runtime_error("results line " + std::to_string(lineno) + ": parse error");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> rows_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return rows_from_csv(ss.str());
}

std::vector<double> read_column_csv(const std::string& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw std::runtime_error("csv " + path + ": expected header '" + header + "', got '" +
                             line + "'");
  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t pos = 0;
      const double v = std::stod(line, &pos);
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos != line.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error("csv " + path + " line " + std::to_string(lineno) +
                               ": expected one number");
    }
  }
  if (out.empty()) throw std::runtime_error("csv " + path + ": no data rows");
  return out;
}

std::vector<NSummary> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::size_t, std::vector<const ResultRow*>> by_n;
  for (const ResultRow& r : rows) by_n[r.n].push_back(&r);
  std::vector<NSummary> out;
  for (const auto& [n, group] : by_n) {
    NSummary s;
    s.n = n;
    s.rows_total = group.size();
    std::vector<double> radii, m2, m5;
    for (const ResultRow* r : group) {
      if (!r->usable()) continue;
      ++s.rows_ok;
      radii.push_back(r->radius);
      m2.push_back(r->mass_outside_2eps);
      m5.push_back(r->mass_outside_5eps);
      if (r->ess >= 50.0) ++s.ess_at_least_50;
    }
    if (!radii.empty()) {
      s.median_radius = quantile(radii, 0.5);
      s.mean_radius = mean(radii);
      s.median_mass2 = quantile(m2, 0.5);
      s.median_mass5 = quantile(m5, 0.5);
    }
    out.push_back(s);
  }
  return out;
}

namespace {

struct FitGroups {
  std::vector<std::size_t> ns;                  // ascending
  std::vector<std::vector<double>> radii;       // usable positive radii per n
  bool dropped_smallest = false;
};

FitGroups group_for_fit(const std::vector<ResultRow>& rows, bool include_smallest) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const ResultRow& r : rows)
    if (r.usable() && r.radius > 0.0) by_n[r.n].push_back(r.radius);
  FitGroups g;
  for (const auto& [n, v] : by_n) {
    g.ns.push_back(n);
    g.radii.push_back(v);
  }
  if (g.ns.size() < 3)
    throw std::runtime_error("fit_rate: need at least 3 distinct n with usable rows");
  if (!include_smallest && g.ns.size() >= 4) {
    g.ns.erase(g.ns.begin());
    g.radii.erase(g.radii.begin());
    g.dropped_smallest = true;
  }
  return g;
}

OlsFit fit_medians(const FitGroups& g, const std::vector<std::vector<double>>& radii,
                   bool with_log_term) {
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < g.ns.size(); ++i) {
    const double med = quantile(radii[i], 0.5);
    if (!(med > 0.0)) throw std::runtime_error("fit_rate: degenerate (nonpositive) median radius");
    const double ln = std::log(static_cast<double>(g.ns[i]));
    x.push_back(ln);
    y.push_back(std::log(med));
    if (with_log_term) {
      if (g.ns[i] < 3) throw std::runtime_error("fit_rate: log-term fit needs n >= 3");
      w.push_back(std::log(ln));
    }
  }
  return ols(x, y, with_log_term ? &w : nullptr);
}

}  // namespace

RateFit fit_rate(const std::vector<ResultRow>& rows, bool with_log_term, bool include_smallest) {
  const FitGroups g = group_for_fit(rows, include_smallest);
  const OlsFit base = fit_medians(g, g.radii, with_log_term);

  RateFit fit;
  fit.exponent = base.slope;
  fit.intercept = base.intercept;
  fit.log_coeff = with_log_term ? base.extra : 0.0;
  fit.has_log_term = with_log_term;
  fit.residual_rms = base.residual_rms;
  fit.points_used = g.ns.size();
  fit.dropped_smallest_n = g.dropped_smallest;

  // Bootstrap over replicates within each n; 200 resamples, central 90%.
  constexpr std::size_t kResamples = 200;
  std::vector<double> slopes;
  slopes.reserve(kResamples);
  std::vector<std::vector<double>> resampled(g.radii.size());
  for (std::size_t b = 0; b < kResamples; ++b) {
    auto eng = make_engine(derive_seed(0x5eedb007ULL, "rate-bootstrap", b));
    for (std::size_t i = 0; i < g.radii.size(); ++i) {
      const auto& src = g.radii[i];
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      auto& dst = resampled[i];
      dst.resize(src.size());
      for (double& v : dst) v = src[pick(eng)];
    }
    slopes.push_back(fit_medians(g, resampled, with_log_term).slope);
  }
  fit.ci_lo = quantile(slopes, 0.05);
  fit.ci_hi = quantile(slopes, 0.95);
  fit.ci_lo = std::min(fit.ci_lo, fit.exponent);
  fit.ci_hi = std::max(fit.ci_hi, fit.exponent);
  return fit;
}

Verdict compare_rate(const RateFit& fit, double theory_exponent, double theory_log_power,
                     double tolerance) {
  Verdict v;
  v.theory_exponent = theory_exponent;
  v.theory_log_power = theory_log_power;
  v.tolerance = tolerance;
  const double width = fit.ci_hi - fit.ci_lo;
  char buf[200];
  if (width > tolerance) {
    v.verdict = "INCONCLUSIVE";
    std::snprintf(buf, sizeof(buf),
                  "bootstrap CI width %.3f exceeds tolerance %.3f; add replicates or n values",
                  width, tolerance);
  } else {
    const double lo = theory_exponent - tolerance;
    const double hi = theory_exponent + tolerance;
    const bool overlap = fit.ci_hi >= lo && fit.ci_lo <= hi;
    v.verdict = overlap ? "PASS" : "FAIL";
    std::snprintf(buf, sizeof(buf),
                  "fitted exponent %.4f (CI [%.4f, %.4f]) vs theory %.4f within +/- %.3f",
                  fit.exponent, fit.ci_lo, fit.ci_hi, theory_exponent, tolerance);
  }
  v.note = buf;
  return v;
}

nlohmann::json fit_to_json(const RateFit& fit, const Verdict* verdict) {
  nlohmann::json j;
  j["exponent"] = fit.exponent;
  j["intercept"] = fit.intercept;
  j["log_coeff"] = fit.has_log_term ? nlohmann::json(fit.log_coeff) : nlohmann::json();
  j["ci_lo"] = fit.ci_lo;
  j["ci_hi"] = fit.ci_hi;
  j["residual_rms"] = fit.residual_rms;
  j["verdict"] = verdict ? nlohmann::json(verdict->verdict) : nlohmann::json();
  return j;
}

nlohmann::json report_json(const std::vector<ResultRow>& rows, const std::string& model,
                           const nlohmann::json& params, double tolerance_override) {
  if (!model_known(model)) throw std::invalid_argument("unknown model id: " + model);
  for (const ResultRow& r : rows)
    if (r.model != model)
      throw std::invalid_argument("results file mixes model '" + r.model +
                                  "' into report for '" + model + "'");
  if (rows.empty()) throw std::invalid_argument("no result rows");

  const TheoreticalRate theory = theoretical_rate(model, params);
  const double tol =
      tolerance_override > 0.0 ? tolerance_override : default_tolerance(model, params);
  const auto per_n = summarize(rows);

  nlohmann::json j;
  j["model"] = model;
  j["theory"] = {{"exponent", theory.exponent}, {"log_power", theory.log_power}};
  j["tolerance"] = tol;
  j["rows"] = rows.size();

  nlohmann::json per;
  std::size_t ess_ok = 0, usable = 0;
  for (const auto& s : per_n) {
    per.push_back({{"n", s.n},
                   {"median_radius", s.median_radius},
                   {"mean_radius", s.mean_radius},
                   {"median_mass_outside_2eps", s.median_mass2},
                   {"median_mass_outside_5eps", s.median_mass5},
                   {"rows_ok", s.rows_ok},
                   {"rows_total", s.rows_total},
                   {"ess_at_least_50", s.ess_at_least_50}});
    ess_ok += s.ess_at_least_50;
    usable += s.rows_total;
  }
  j["per_n"] = per;

  const bool is_model = (model == "binary-dp" || model == "whittle");
  const bool mass_model = (model == "poisson-sieve");

  // Exponent fit where it is meaningful; properties otherwise.
  bool fit_ok = false;
  RateFit fit;
  std::string fit_error;
  try {
    fit = fit_rate(rows, /*with_log_term=*/false);
    fit_ok = true;
  } catch (const std::exception& e) {
    fit_error = e.what();
  }

  if (!is_model && !mass_model) {
    if (!fit_ok) throw std::runtime_error("rate fit failed: " + fit_error);
    const Verdict v = compare_rate(fit, theory.exponent, theory.log_power, tol);
    j["fit"] = fit_to_json(fit, &v);
    j["verdict"] = v.verdict;
    j["note"] = v.note;
    return j;
  }

  if (fit_ok)
    j["fit"] = fit_to_json(fit, nullptr);
  else
    j["fit"] = nlohmann::json();

  if (mass_model) {
    // Property check: median posterior mass outside the reporting radius
    // decreases monotonically across the n grid and ends below 0.05.
    bool monotone = per_n.size() >= 2;
    for (std::size_t i = 1; i < per_n.size(); ++i)
      if (per_n[i].median_mass5 > per_n[i - 1].median_mass5 + 1e-9) monotone = false;
    const double last = per_n.empty() ? 1.0 : per_n.back().median_mass5;
    const bool small_end = last < 0.05;
    j["property"] = {{"mass_outside_monotone", monotone},
                     {"final_median_mass_outside", last},
                     {"final_below_0.05", small_end}};
    j["verdict"] = (monotone && small_end) ? "PASS" : "FAIL";
    j["note"] =
        "exact sieve posterior; acceptance is property-based (monotone decay of the posterior "
        "mass outside the reference radius), since the sieve constant is not pinned";
    return j;
  }

  // Importance-sampling models: property-based acceptance only.
  bool radius_monotone = per_n.size() >= 2;
  for (std::size_t i = 1; i < per_n.size(); ++i)
    if (!(per_n[i].median_radius < per_n[i - 1].median_radius)) radius_monotone = false;
  double ess_fraction = usable == 0 ? 0.0
                                    : static_cast<double>(ess_ok) / static_cast<double>(usable);
  j["property"] = {{"radius_monotone_decreasing", radius_monotone},
                   {"ess_at_least_50_fraction", ess_fraction}};
  j["verdict"] = (radius_monotone && ess_fraction >= 0.8) ? "PASS" : "FAIL";
  j["caveat"] =
      "importance-sampled posterior: exact contraction rates are not reliably reproducible at "
      "this scale, so acceptance is property-based (median radius decreasing in n, effective "
      "sample size at least 50 on at least 80% of replicates); the fitted exponent is reported "
      "for inspection only";
  j["note"] = j["caveat"];
  return j;
}

}  // namespace ratelab::harness

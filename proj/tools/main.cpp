#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ratelab/covering.hpp"
#include "ratelab/density.hpp"
#include "ratelab/divergences.hpp"
#include "ratelab/harness.hpp"
#include "ratelab/lrtests.hpp"
#include "ratelab/priors.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/spectral.hpp"

namespace {

using nlohmann::json;

json params_from_option(const std::string& opt) {
  if (opt.empty()) return json::object();
  if (!opt.empty() && opt.front() == '{') return json::parse(opt);
  std::ifstream in(opt);
  if (!in) throw std::runtime_error("cannot open model config: " + opt);
  json j;
  in >> j;
  return j;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw CLI::ValidationError("empty entry in parameter list: " + csv);
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("empty parameter list");
  return out;
}

ratelab::Density density_from_cli(const std::string& family, const std::string& params) {
  const auto fam = ratelab::family_from_string(family);
  const auto p = parse_number_list(params);
  auto need = [&](std::size_t k) {
    if (p.size() != k)
      throw CLI::ValidationError("family " + family + " takes " + std::to_string(k) +
                                 " parameter(s), got " + std::to_string(p.size()));
  };
  switch (fam) {
    case ratelab::Family::NormalLocation:
      need(1);
      return ratelab::Density::normal_location(p[0]);
    case ratelab::Family::Normal:
      need(2);
      return ratelab::Density::normal(p[0], p[1]);
    case ratelab::Family::Poisson:
      need(1);
      return ratelab::Density::poisson(p[0]);
    case ratelab::Family::Bernoulli:
      need(1);
      return ratelab::Density::bernoulli(p[0]);
    case ratelab::Family::Exponential:
      need(1);
      return ratelab::Density::exponential(p[0]);
    default:
      throw CLI::ValidationError("family " + family + " is not supported on the CLI");
  }
}

json test_report_json(const ratelab::lrt::TestReport& r, const std::string& suite) {
  return json{{"suite", suite},
              {"n", r.n},
              {"replicates", r.replicates},
              {"separation", r.separation},
              {"type1", r.type1},
              {"type1_se", r.type1_se},
              {"type1_bound", r.type1_bound},
              {"type2", r.type2},
              {"type2_se", r.type2_se},
              {"type2_bound", r.type2_bound},
              {"note", r.note}};
}

void run_suite_lemma5(std::size_t replicates, std::uint64_t seed) {
  const std::vector<double> theta0 = {0.3, -0.2, 0.1, 0.0};
  std::size_t c = 0;
  for (const double sep : {0.5, 1.0}) {
    for (const std::size_t n : {25u, 100u}) {
      std::vector<double> theta1 = theta0;
      theta1[0] += sep;
      const auto rep = ratelab::lrt::whitenoise_lr_test(
          theta0, theta1, n, replicates, ratelab::derive_seed(seed, "lemma5", c++));
      std::cout << test_report_json(rep, "lemma5").dump() << "\n";
    }
  }
}

void run_suite_lemma2(std::size_t replicates, std::uint64_t seed) {
  struct Pair {
    ratelab::Density p0, p1;
  };
  const std::vector<Pair> pairs = {
      {ratelab::Density::normal(0.0, 1.0), ratelab::Density::normal(0.7, 1.0)},
      {ratelab::Density::poisson(2.0), ratelab::Density::poisson(3.2)},
      {ratelab::Density::bernoulli(0.35), ratelab::Density::bernoulli(0.6)},
      {ratelab::Density::exponential(1.0), ratelab::Density::exponential(1.8)},
  };
  std::size_t c = 0;
  for (const auto& pr : pairs) {
    for (const std::size_t n : {20u, 80u}) {
      const auto rep = ratelab::lrt::product_lr_test(
          pr.p0, pr.p1, n, replicates, ratelab::derive_seed(seed, "lemma2", c++));
      std::cout << test_report_json(rep, "lemma2").dump() << "\n";
    }
  }
}

void run_suite_lemma9(std::size_t replicates, std::uint64_t seed) {
  const std::vector<double> theta0 = {0.1, -0.1, 0.2, 0.0, 0.0, 0.0};
  const std::size_t n = 100;
  const double eps = 0.6;  // n eps^2 = 36
  std::vector<ratelab::lrt::ShellNet> nets;
  for (std::size_t j = 1; j <= 3; ++j)
    nets.push_back(ratelab::lrt::make_shell_net(theta0, j, eps, 1500,
                                                ratelab::derive_seed(seed, "lemma9-net", j)));
  const auto agg = ratelab::lrt::aggregate_whitenoise_test(
      theta0, nets, n, eps, replicates, ratelab::derive_seed(seed, "lemma9"));
  json shells = json::array();
  for (const auto& s : agg.shells)
    shells.push_back(json{{"j", s.j},
                          {"net_size", s.net_size},
                          {"type1_sum", s.type1_sum},
                          {"type2_max", s.type2_max},
                          {"type2_se", s.type2_se},
                          {"type2_bound", s.type2_bound}});
  std::cout << json{{"suite", "lemma9"},
                    {"n", agg.n},
                    {"replicates", agg.replicates},
                    {"eps", agg.eps},
                    {"K", agg.K},
                    {"type1_direct", agg.type1_direct},
                    {"type1_se", agg.type1_se},
                    {"type1_sum", agg.type1_sum},
                    {"series_bound", agg.series_bound},
                    {"shells", shells}}
                   .dump()
            << "\n";
}

void run_suite_lemma10(std::size_t replicates, std::uint64_t seed) {
  const std::size_t n = 100;
  ratelab::SequencePrior prior;
  prior.k = 4;
  prior.variances.assign(4, 0.25);
  prior.alpha = 1.0;
  const std::vector<double> theta0 = {0.2, -0.1, 0.05, 0.0};
  std::size_t c = 0;
  for (const double neps2 : {4.0, 16.0, 64.0}) {
    const double eps = std::sqrt(neps2 / static_cast<double>(n));
    const auto rep = ratelab::lrt::evidence_bound_check(
        theta0, prior, /*C=*/1.0, /*k=*/2.0, n, eps, /*support=*/200, replicates,
        ratelab::derive_seed(seed, "lemma10", c++));
    std::cout << json{{"suite", "lemma10"},
                      {"n", rep.n},
                      {"replicates", rep.replicates},
                      {"n_eps2", neps2},
                      {"C", rep.C},
                      {"k", rep.k},
                      {"freq", rep.freq},
                      {"se", rep.se},
                      {"bound", rep.bound},
                      {"threshold", rep.threshold},
                      {"accept_rate", rep.accept_rate},
                      {"support_size", rep.support_size}}
                     .dump()
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for posterior contraction experiments"};
  app.require_subcommand(1);

  // --- divergence ---------------------------------------------------------------
  std::string div_family, div_p, div_q, div_measure;
  auto* div = app.add_subcommand("divergence", "closed-form divergence between two densities");
  div->add_option("--family", div_family, "density family")->required();
  div->add_option("--p", div_p, "comma-separated parameters of p")->required();
  div->add_option("--q", div_q, "comma-separated parameters of q")->required();
  div->add_option("--measure", div_measure, "hellinger2|kl|v2|v20")
      ->required()
      ->check(CLI::IsMember({"hellinger2", "kl", "v2", "v20"}));

  // --- cover ----------------------------------------------------------------------
  std::string cover_class;
  double cover_eps = 0.1, cover_a = 0.0, cover_b = 1.0, cover_radius = 1.0;
  double cover_L = 1.0, cover_U = 2.0;
  std::size_t cover_dim = 2, cover_grid = 16, cover_points = 64, cover_cap = 4096;
  auto* cover = app.add_subcommand("cover", "covering / bracketing constructions");
  cover->add_option("--class", cover_class, "interval|ball|monotone|poisson-sieve")
      ->required()
      ->check(CLI::IsMember({"interval", "ball", "monotone", "poisson-sieve"}));
  cover->add_option("--eps", cover_eps, "cover resolution")->required();
  cover->add_option("--a", cover_a, "interval left end");
  cover->add_option("--b", cover_b, "interval right end");
  cover->add_option("--dim", cover_dim, "ball dimension");
  cover->add_option("--radius", cover_radius, "ball radius");
  cover->add_option("--grid-size", cover_grid, "monotone-class grid size");
  cover->add_option("--cap", cover_cap, "enumeration cap");
  cover->add_option("--L", cover_L, "link lower bound");
  cover->add_option("--U", cover_U, "link upper bound");
  cover->add_option("--points", cover_points, "covariate count for the link sieve");

  // --- tests run ------------------------------------------------------------------
  auto* tests = app.add_subcommand("tests", "test constructions and bound checks");
  std::string suite;
  std::size_t suite_reps = 100000;
  std::uint64_t suite_seed = 20070331;
  auto* tests_run = tests->add_subcommand("run", "run a bound-check suite");
  tests_run->add_option("--suite", suite, "lemma5|lemma2|lemma9|lemma10")
      ->required()
      ->check(CLI::IsMember({"lemma5", "lemma2", "lemma9", "lemma10"}));
  tests_run->add_option("--replicates", suite_reps, "Monte Carlo replicates");
  tests_run->add_option("--seed", suite_seed, "master seed");

  // --- run ------------------------------------------------------------------------
  std::string run_config, run_out;
  std::size_t run_workers = 0;
  bool run_timing = false;
  auto* run = app.add_subcommand("run", "run a contraction experiment from a JSON config");
  run->add_option("--config", run_config, "experiment config path")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_option("--workers", run_workers, "override worker count");
  run->add_flag("--timing", run_timing, "record per-row wall time (breaks byte determinism)");

  // --- rates fit --------------------------------------------------------------------
  auto* rates = app.add_subcommand("rates", "rate fitting");
  std::string fit_in, fit_params;
  bool fit_log_term = false, fit_include_smallest = false;
  auto* fit_cmd = rates->add_subcommand("fit", "fit log-radius on log n from a results CSV");
  fit_cmd->add_option("--in", fit_in, "results CSV path")->required();
  fit_cmd->add_flag("--log-term", fit_log_term, "add a log log n regressor");
  fit_cmd->add_flag("--include-smallest", fit_include_smallest,
                    "keep the smallest n in the fit");
  fit_cmd->add_option("--model-config", fit_params,
                      "model config JSON (inline or a file path) for the theory comparison");

  // --- report -------------------------------------------------------------------------
  std::string report_in, report_model, report_params;
  double report_tol = 0.0;
  auto* report = app.add_subcommand("report", "verdict report for a results CSV");
  report->add_option("--in", report_in, "results CSV path")->required();
  report->add_option("--model", report_model, "model id")->required();
  report->add_option("--tolerance", report_tol, "exponent tolerance override");
  report->add_option("--model-config", report_params,
                     "model config JSON (inline or a file path) for the theory comparison");

  // --- demo ----------------------------------------------------------------------------
  auto* demo = app.add_subcommand("demo", "one-off posterior summaries on provided data");
  std::string demo_in;
  std::size_t demo_draws = 10000;
  std::uint64_t demo_seed = 7;
  double demo_quantile = 0.9;
  auto* demo_whittle = demo->add_subcommand("whittle", "spectral posterior on a series CSV");
  demo_whittle->add_option("--in", demo_in, "time-series CSV (single column x)")->required();
  demo_whittle->add_option("--draws", demo_draws, "importance-sampling draws");
  demo_whittle->add_option("--seed", demo_seed, "seed");
  demo_whittle->add_option("--quantile", demo_quantile, "radius quantile");

  CLI11_PARSE(app, argc, argv);

  try {
    if (div->parsed()) {
      const auto p = density_from_cli(div_family, div_p);
      const auto q = density_from_cli(div_family, div_q);
      double v = 0.0;
      if (div_measure == "hellinger2")
        v = ratelab::hellinger_sq(p, q);
      else if (div_measure == "kl")
        v = ratelab::kl(p, q);
      else if (div_measure == "v2")
        v = ratelab::v_k(p, q, 2);
      else
        v = ratelab::v_k0(p, q, 2);
      std::printf("%.12g\n", v);
      return 0;
    }

    if (cover->parsed()) {
      ratelab::CoverReport rep;
      rep.cls = cover_class;
      rep.eps = cover_eps;
      if (cover_class == "interval") {
        const std::size_t c = ratelab::cover_interval(cover_eps, cover_a, cover_b);
        rep.count = static_cast<double>(c);
        rep.log_count = std::log(static_cast<double>(c));
        rep.log_bound = 0.0;
        rep.note = "eps-net of [" + std::to_string(cover_a) + ", " + std::to_string(cover_b) +
                   "] by midpoints";
      } else if (cover_class == "ball") {
        rep.count = 0.0;
        rep.log_count = 0.0;
        rep.log_bound = ratelab::euclidean_ball_cover_bound(cover_dim, cover_radius, cover_eps);
        rep.note = "d log(3R/eps) upper bound; no enumeration in dimension > 1";
      } else if (cover_class == "monotone") {
        const auto m = ratelab::monotone_class_entropy(cover_eps, cover_grid, cover_cap);
        rep.count = m.enumerated ? static_cast<double>(m.brackets.size()) : 0.0;
        rep.log_count = m.log_count;
        rep.log_bound =
            static_cast<double>(m.grid_size) * std::log(static_cast<double>(m.levels + 1));
        rep.note = m.enumerated ? "bracket set enumerated exactly"
                                : "bracket count via lattice-path formula";
      } else {
        std::vector<double> z(cover_points);
        for (std::size_t i = 0; i < cover_points; ++i)
          z[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(cover_points);
        const auto sieve = ratelab::poisson_bracketing(cover_eps, cover_L, cover_U, z);
        rep.count = sieve.enumerated ? static_cast<double>(sieve.links.size()) : 0.0;
        rep.log_count = sieve.log_count;
        rep.log_bound = static_cast<double>(sieve.cells) *
                        std::log(static_cast<double>(sieve.level_count));
        rep.note = "monotone staircase links, " + std::to_string(sieve.cells) + " cells x " +
                   std::to_string(sieve.level_count) + " levels";
      }
      std::cout << json{{"class", rep.cls},     {"eps", rep.eps},
                        {"count", rep.count},   {"log_count", rep.log_count},
                        {"log_bound", rep.log_bound}, {"note", rep.note}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (tests_run->parsed()) {
      if (suite == "lemma5")
        run_suite_lemma5(suite_reps, suite_seed);
      else if (suite == "lemma2")
        run_suite_lemma2(suite_reps, suite_seed);
      else if (suite == "lemma9")
        run_suite_lemma9(std::min<std::size_t>(suite_reps, 20000), suite_seed);
      else
        run_suite_lemma10(std::min<std::size_t>(suite_reps, 20000), suite_seed);
      return 0;
    }

    if (run->parsed()) {
      auto cfg = ratelab::harness::ExperimentConfig::from_file(run_config);
      if (run_workers > 0) cfg.workers = run_workers;
      if (run_timing) cfg.timing = true;
      const auto rows = ratelab::harness::run_experiment(cfg);
      std::filesystem::create_directories(run_out);
      const auto csv_path = std::filesystem::path(run_out) / "results.csv";
      {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + csv_path.string());
        out << ratelab::harness::to_csv(rows);
      }
      std::size_t ok = 0;
      for (const auto& r : rows)
        if (r.usable()) ++ok;
      std::cout << "wrote " << csv_path.string() << " (" << rows.size() << " rows, " << ok
                << " usable)\n";
      return 0;
    }

    if (fit_cmd->parsed()) {
      const auto rows = ratelab::harness::rows_from_csv_file(fit_in);
      if (rows.empty()) throw std::runtime_error("no rows in " + fit_in);
      std::string model = rows.front().model;
      for (const auto& r : rows)
        if (r.model != model)
          throw std::runtime_error("results file mixes models; use one experiment per file");
      const auto fit =
          ratelab::harness::fit_rate(rows, fit_log_term, fit_include_smallest);
      const json params = params_from_option(fit_params);
      const auto theory = ratelab::harness::theoretical_rate(model, params);
      const auto verdict = ratelab::harness::compare_rate(
          fit, theory.exponent, theory.log_power,
          ratelab::harness::default_tolerance(model, params));
      std::cout << ratelab::harness::fit_to_json(fit, &verdict).dump(2) << "\n";
      return 0;
    }

    if (report->parsed()) {
      const auto rows = ratelab::harness::rows_from_csv_file(report_in);
      const auto rep = ratelab::harness::report_json(rows, report_model,
                                                     params_from_option(report_params),
                                                     report_tol);
      std::cout << rep.dump(2) << "\n";
      return 0;
    }

    if (demo_whittle->parsed()) {
      const auto x = ratelab::harness::read_column_csv(demo_in, "x");
      const std::size_t n = x.size();
      ratelab::BernsteinDirichletPrior prior;
      const double cap = std::ceil(0.5 * std::pow(static_cast<double>(n), 1.0 / 3.0) *
                                   std::pow(std::log(static_cast<double>(n)), 2.0 / 3.0));
      prior.k_max = std::clamp(static_cast<std::size_t>(cap), std::size_t{4}, std::size_t{30});
      const std::vector<double> w0 = {0.4, 0.1, 0.1, 0.4};
      const auto f_ref = ratelab::spectral::SpectralDensity::from_function(
          [&](double u) { return 0.2 * ratelab::bernstein_density(4, w0, u); });
      auto eng = ratelab::make_engine(demo_seed);
      const double eps_ref = std::pow(static_cast<double>(n), -1.0 / 3.0) *
                             std::pow(std::log(static_cast<double>(n)), 1.0 / 3.0);
      const auto s = ratelab::spectral::whittle_posterior_is(
          x, prior, f_ref, std::max<std::size_t>(demo_draws, 1000), demo_quantile, eps_ref,
          eng);
      std::cout << json{{"n", n},
                        {"draws", s.draws},
                        {"ess", s.ess},
                        {"ess_low", s.ess_low},
                        {"radius_vs_reference", s.radius},
                        {"posterior_mean_mid", s.mean_mid},
                        {"reference_mid", s.f0_mid},
                        {"note",
                         "radius is measured to a fixed reference density, not to the "
                         "unknown truth of the provided series"}}
                       .dump(2)
                << "\n";
      return 0;
    }

    std::cerr << "no subcommand executed\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

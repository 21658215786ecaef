#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ratelab/harness.hpp"
#include "ratelab/rng.hpp"

using namespace ratelab;
using namespace ratelab::harness;

namespace {

ExperimentConfig small_white_noise_config() {
  ExperimentConfig cfg;
  cfg.model = "white-noise";
  cfg.n_grid = {50, 100, 150};
  cfg.replicates = 5;
  cfg.posterior_draws = 200;
  cfg.quantile = 0.9;
  cfg.seed = 123;
  return cfg;
}

// Synthetic result rows with a prescribed radius law; every replicate at a
// given n carries the same radius unless jitter is supplied.
std::vector<ResultRow> synthetic_rows(const std::string& model,
                                      const std::vector<std::size_t>& ns, std::size_t reps,
                                      const std::function<double(std::size_t, std::size_t)>& radius,
                                      double ess = 2000.0) {
  std::vector<ResultRow> rows;
  for (std::size_t ni = 0; ni < ns.size(); ++ni)
    for (std::size_t r = 0; r < reps; ++r) {
      ResultRow row;
      row.model = model;
      row.n = ns[ni];
      row.replicate = r;
      row.seed = 1;
      row.quantile = 0.9;
      row.radius = radius(ns[ni], r);
      row.ess = ess;
      row.status = "ok";
      rows.push_back(row);
    }
  return rows;
}

}  // namespace

TEST_CASE("experiment rows arrive in canonical order with derived per-task seeds") {
  const ExperimentConfig cfg = small_white_noise_config();
  const std::vector<ResultRow> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 15);
  for (std::size_t task = 0; task < rows.size(); ++task) {
    const std::size_t ni = task / cfg.replicates;
    const std::size_t rep = task % cfg.replicates;
    REQUIRE(rows[task].model == "white-noise");
    REQUIRE(rows[task].n == cfg.n_grid[ni]);
    REQUIRE(rows[task].replicate == rep);
    REQUIRE(rows[task].seed == derive_seed(cfg.seed, cfg.model, ni, rep));
    REQUIRE(rows[task].quantile == 0.9);
    REQUIRE(rows[task].status == "ok");
    REQUIRE(rows[task].radius > 0.0);
    REQUIRE(rows[task].elapsed_ms == 0.0);  // timing defaults off
  }
}

TEST_CASE("rerunning with the same master seed is byte-identical across worker counts") {
  ExperimentConfig cfg = small_white_noise_config();
  const std::string csv1 = to_csv(run_experiment(cfg));
  cfg.workers = 4;
  const std::string csv4 = to_csv(run_experiment(cfg));
  cfg.workers = 1;
  const std::string csv1b = to_csv(run_experiment(cfg));
  REQUIRE(csv1 == csv4);
  REQUIRE(csv1 == csv1b);

  // a different master seed changes the data
  cfg.seed = 124;
  REQUIRE(to_csv(run_experiment(cfg)) != csv1);
}

TEST_CASE("replicate failures are captured as status rows, not crashes") {
  ExperimentConfig cfg;
  cfg.model = "binary-dp";
  cfg.n_grid = {600, 700, 800};  // beyond the importance-sampling guard
  cfg.replicates = 5;
  cfg.posterior_draws = 100;
  const std::vector<ResultRow> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 15);
  for (const ResultRow& r : rows) {
    REQUIRE(r.status.rfind("error: ", 0) == 0);
    REQUIRE_FALSE(r.usable());
    REQUIRE(r.status.find(',') == std::string::npos);  // csv-safe
  }
  // the csv still round-trips
  const std::vector<ResultRow> back = rows_from_csv(to_csv(rows));
  REQUIRE(back.size() == rows.size());
  REQUIRE(back[0].status == rows[0].status);
}

TEST_CASE("results csv round-trips every field") {
  std::vector<ResultRow> rows(2);
  rows[0].model = "white-noise";
  rows[0].n = 256;
  rows[0].replicate = 3;
  rows[0].seed = 9876543210123ull;
  rows[0].quantile = 0.9;
  rows[0].radius = 0.125;  // short decimals survive %.10g exactly
  rows[0].mass_outside_2eps = 0.25;
  rows[0].mass_outside_5eps = 0.0625;
  rows[0].ess = 2000.0;
  rows[0].elapsed_ms = 1.5;
  rows[0].status = "ok";
  rows[1] = rows[0];
  rows[1].replicate = 4;
  rows[1].status = "low-ess";

  const std::string csv = to_csv(rows);
  const std::vector<ResultRow> back = rows_from_csv(csv);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(back[i].model == rows[i].model);
    REQUIRE(back[i].n == rows[i].n);
    REQUIRE(back[i].replicate == rows[i].replicate);
    REQUIRE(back[i].seed == rows[i].seed);
    REQUIRE(back[i].quantile == rows[i].quantile);
    REQUIRE(back[i].radius == rows[i].radius);
    REQUIRE(back[i].mass_outside_2eps == rows[i].mass_outside_2eps);
    REQUIRE(back[i].mass_outside_5eps == rows[i].mass_outside_5eps);
    REQUIRE(back[i].ess == rows[i].ess);
    REQUIRE(back[i].elapsed_ms == rows[i].elapsed_ms);
    REQUIRE(back[i].status == rows[i].status);
  }

  // the header is pinned
  REQUIRE(csv.rfind("model,n,replicate,seed,quantile,radius,mass_outside_2eps,"
                    "mass_outside_5eps,ess,elapsed_ms,status\n",
                    0) == 0);
  REQUIRE(back[0].usable());
  REQUIRE(back[1].usable());

  REQUIRE_THROWS_AS(rows_from_csv("wrong,header\n1,2\n"), std::runtime_error);
  REQUIRE_THROWS_AS(rows_from_csv(""), std::runtime_error);
  const std::string bad_fields = csv.substr(0, csv.find('\n') + 1) + "a,b,c\n";
  REQUIRE_THROWS_AS(rows_from_csv(bad_fields), std::runtime_error);
}

TEST_CASE("rate fit recovers exact power laws") {
  const std::vector<std::size_t> ns = {100, 200, 400, 800, 1600};

  SECTION("pure n^{-1/2}") {
    const auto rows = synthetic_rows("white-noise", ns, 6, [](std::size_t n, std::size_t) {
      return std::pow(static_cast<double>(n), -0.5);
    });
    const RateFit fit = fit_rate(rows, /*with_log_term=*/false);
    REQUIRE(fit.exponent == Catch::Approx(-0.5).margin(1e-12));
    REQUIRE(fit.intercept == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(fit.residual_rms <= 1e-12);
    REQUIRE(fit.points_used == 4);  // smallest n dropped
    REQUIRE(fit.dropped_smallest_n);
    // every bootstrap resample sees identical radii, so the interval collapses
    REQUIRE(fit.ci_lo == Catch::Approx(-0.5).margin(1e-12));
    REQUIRE(fit.ci_hi == Catch::Approx(-0.5).margin(1e-12));

    const RateFit all = fit_rate(rows, false, /*include_smallest=*/true);
    REQUIRE(all.points_used == 5);
    REQUIRE_FALSE(all.dropped_smallest_n);
    REQUIRE(all.exponent == Catch::Approx(-0.5).margin(1e-12));
  }

  SECTION("scaled 3 n^{-1/3} puts the scale in the intercept") {
    const auto rows = synthetic_rows("white-noise", ns, 5, [](std::size_t n, std::size_t) {
      return 3.0 * std::pow(static_cast<double>(n), -1.0 / 3.0);
    });
    const RateFit fit = fit_rate(rows, false);
    REQUIRE(fit.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-12));
    REQUIRE(fit.intercept == Catch::Approx(std::log(3.0)).margin(1e-10));
  }

  SECTION("log-term fit separates the polynomial and logarithmic factors") {
    const std::vector<std::size_t> wide = {100, 200, 400, 800, 1600, 3200};
    const auto rows = synthetic_rows("white-noise", wide, 5, [](std::size_t n, std::size_t) {
      const double nn = static_cast<double>(n);
      return 0.8 * std::pow(nn, -1.0 / 3.0) * std::sqrt(std::log(nn));
    });
    const RateFit fit = fit_rate(rows, /*with_log_term=*/true);
    REQUIRE(fit.has_log_term);
    REQUIRE(fit.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-9));
    REQUIRE(fit.log_coeff == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(fit.intercept == Catch::Approx(std::log(0.8)).margin(1e-9));
  }

  SECTION("degenerate inputs throw") {
    const auto two = synthetic_rows("white-noise", {100, 200}, 5, [](std::size_t, std::size_t) {
      return 0.5;
    });
    REQUIRE_THROWS_AS(fit_rate(two, false), std::runtime_error);
    auto zeros = synthetic_rows("white-noise", ns, 5,
                                [](std::size_t, std::size_t) { return 0.0; });
    REQUIRE_THROWS_AS(fit_rate(zeros, false), std::runtime_error);
  }
}

TEST_CASE("verdicts reflect tolerance and interval width") {
  const std::vector<std::size_t> ns = {100, 200, 400, 800, 1600};
  const auto rows = synthetic_rows("white-noise", ns, 5, [](std::size_t n, std::size_t) {
    return std::pow(static_cast<double>(n), -0.5);
  });
  const RateFit fit = fit_rate(rows, false);

  SECTION("exact agreement passes") {
    const Verdict v = compare_rate(fit, -0.5, 0.0, 0.08);
    REQUIRE(v.verdict == "PASS");
    REQUIRE(v.tolerance == 0.08);
  }
  SECTION("a tight interval far from theory fails") {
    const Verdict v = compare_rate(fit, -1.0 / 3.0, 0.0, 0.08);
    REQUIRE(v.verdict == "FAIL");
  }
  SECTION("a wide interval is inconclusive") {
    RateFit wide = fit;
    wide.ci_lo = -0.7;
    wide.ci_hi = -0.3;
    const Verdict v = compare_rate(wide, -0.5, 0.0, 0.08);
    REQUIRE(v.verdict == "INCONCLUSIVE");
    REQUIRE(v.note.find("width") != std::string::npos);
  }
}

TEST_CASE("config parsing validates keys and ranges") {
  nlohmann::json base = {
      {"model", "white-noise"},
      {"n_grid", {50, 100, 200}},
  };

  SECTION("defaults fill unspecified fields") {
    const ExperimentConfig cfg = ExperimentConfig::from_json(base);
    REQUIRE(cfg.replicates == 5);
    REQUIRE(cfg.posterior_draws == 2000);
    REQUIRE(cfg.quantile == 0.9);
    REQUIRE(cfg.seed == 1);
    REQUIRE(cfg.workers == 1);
    REQUIRE_FALSE(cfg.timing);
    REQUIRE(cfg.exponent_tolerance == 0.0);
  }

  SECTION("unknown keys are rejected") {
    nlohmann::json j = base;
    j["bogus"] = 1;
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("unknown model is rejected") {
    nlohmann::json j = base;
    j["model"] = "no-such-model";
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("replicate floor") {
    nlohmann::json j = base;
    j["replicates"] = 4;
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("n grid must be strictly increasing with entries at least 2") {
    nlohmann::json j = base;
    j["n_grid"] = {100, 100, 200};
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    j["n_grid"] = {1, 100};
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
    j["n_grid"] = nlohmann::json::array();
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("quantile must be interior") {
    nlohmann::json j = base;
    j["quantile"] = 1.0;
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("workers must be positive") {
    nlohmann::json j = base;
    j["workers"] = 0;
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }

  SECTION("tolerances accepts a number or an object with an exponent key") {
    nlohmann::json j = base;
    j["tolerances"] = 0.1;
    REQUIRE(ExperimentConfig::from_json(j).exponent_tolerance == 0.1);
    j["tolerances"] = {{"exponent", 0.12}};
    REQUIRE(ExperimentConfig::from_json(j).exponent_tolerance == 0.12);
    j["tolerances"] = "loose";
    REQUIRE_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
  }
}

TEST_CASE("model registry pins rates, tolerances, and reference radii") {
  const nlohmann::json none = nlohmann::json::object();

  REQUIRE(model_known("white-noise"));
  REQUIRE(model_known("whittle"));
  REQUIRE_FALSE(model_known("mystery"));
  REQUIRE(model_ids().size() == 7);

  auto rate = theoretical_rate("white-noise", none);
  REQUIRE(rate.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-15));
  REQUIRE(rate.log_power == 0.0);
  rate = theoretical_rate("white-noise", {{"alpha", 2.0}});
  REQUIRE(rate.exponent == Catch::Approx(-0.4).margin(1e-15));

  rate = theoretical_rate("spline-regression", none);
  REQUIRE(rate.exponent == Catch::Approx(-0.4).margin(1e-15));
  REQUIRE(rate.log_power == 0.0);

  rate = theoretical_rate("parametric-grid", none);  // defaults to the endpoint family
  REQUIRE(rate.exponent == Catch::Approx(-1.0).margin(1e-15));
  rate = theoretical_rate("parametric-grid", {{"family", "normal-location-scaled"}});
  REQUIRE(rate.exponent == Catch::Approx(-0.5).margin(1e-15));

  rate = theoretical_rate("nl-autoregression", none);
  REQUIRE(rate.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-15));
  REQUIRE(rate.log_power == 0.5);

  rate = theoretical_rate("poisson-sieve", none);
  REQUIRE(rate.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-15));
  REQUIRE(rate.log_power == 0.0);

  for (const char* m : {"binary-dp", "whittle"}) {
    rate = theoretical_rate(m, none);
    REQUIRE(rate.exponent == Catch::Approx(-1.0 / 3.0).margin(1e-15));
    REQUIRE(rate.log_power == Catch::Approx(1.0 / 3.0).margin(1e-15));
  }
  REQUIRE_THROWS_AS(theoretical_rate("mystery", none), std::invalid_argument);

  REQUIRE(default_tolerance("white-noise", none) == 0.08);
  REQUIRE(default_tolerance("spline-regression", none) == 0.08);
  REQUIRE(default_tolerance("parametric-grid", none) == 0.15);
  REQUIRE(default_tolerance("parametric-grid", {{"family", "normal-location-scaled"}}) == 0.08);
  REQUIRE(default_tolerance("nl-autoregression", none) == 0.12);
  REQUIRE(default_tolerance("poisson-sieve", none) == 0.10);
  REQUIRE(default_tolerance("binary-dp", none) == 0.15);
  REQUIRE(default_tolerance("whittle", none) == 0.15);

  // reference radius: eps_scale * n^exponent * (log n)^log_power
  const double n = 1000.0;
  REQUIRE(eps_reference("white-noise", none, 1000) ==
          Catch::Approx(std::pow(n, -1.0 / 3.0)).margin(1e-15));
  REQUIRE(eps_reference("poisson-sieve", none, 1000) ==
          Catch::Approx(0.28284271247461906 * std::pow(n, -1.0 / 3.0)).margin(1e-15));
  REQUIRE(eps_reference("poisson-sieve", {{"eps_scale", 0.5}}, 1000) ==
          Catch::Approx(0.5 * std::pow(n, -1.0 / 3.0)).margin(1e-15));
  REQUIRE(eps_reference("binary-dp", none, 1000) ==
          Catch::Approx(std::pow(n, -1.0 / 3.0) * std::pow(std::log(n), 1.0 / 3.0))
              .margin(1e-15));
}

TEST_CASE("per-n summaries count usable rows and effective sample sizes") {
  std::vector<ResultRow> rows = synthetic_rows(
      "binary-dp", {100, 200}, 4,
      [](std::size_t n, std::size_t r) { return 1.0 / static_cast<double>(n + r); }, 60.0);
  rows[1].status = "error: synthetic failure";  // n=100, replicate 1
  rows[2].status = "low-ess";                   // usable but flagged
  rows[2].ess = 12.0;

  const auto per = summarize(rows);
  REQUIRE(per.size() == 2);
  REQUIRE(per[0].n == 100);
  REQUIRE(per[0].rows_total == 4);
  REQUIRE(per[0].rows_ok == 3);
  REQUIRE(per[0].ess_at_least_50 == 2);  // the low-ess row has ess 12
  REQUIRE(per[1].rows_ok == 4);
  REQUIRE(per[1].ess_at_least_50 == 4);
  // median over the three usable radii at n=100: {1/100, 1/102, 1/103}
  REQUIRE(per[0].median_radius == Catch::Approx(1.0 / 102.0).margin(1e-15));
}

TEST_CASE("report json chooses exponent or property acceptance per model") {
  const std::vector<std::size_t> ns = {100, 200, 400, 800};

  SECTION("exact-posterior models get a rate verdict") {
    const auto rows = synthetic_rows("white-noise", ns, 5, [](std::size_t n, std::size_t) {
      return std::pow(static_cast<double>(n), -1.0 / 3.0);
    });
    const nlohmann::json j = report_json(rows, "white-noise", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "PASS");
    REQUIRE(j.at("fit").at("verdict").get<std::string>() == "PASS");
    REQUIRE(j.at("theory").at("exponent").get<double>() ==
            Catch::Approx(-1.0 / 3.0).margin(1e-15));
    REQUIRE(j.at("per_n").size() == 4);
  }

  SECTION("the sieve model passes on monotone mass decay") {
    auto rows = synthetic_rows("poisson-sieve", ns, 5, [](std::size_t n, std::size_t) {
      return std::pow(static_cast<double>(n), -1.0 / 3.0);
    });
    for (ResultRow& r : rows)
      r.mass_outside_5eps = 4.0 / static_cast<double>(r.n);  // 0.04 at n=100, decreasing
    nlohmann::json j = report_json(rows, "poisson-sieve", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "PASS");
    REQUIRE(j.at("property").at("mass_outside_monotone").get<bool>());
    REQUIRE(j.at("property").at("final_below_0.05").get<bool>());

    // breaking monotonicity flips the verdict
    for (ResultRow& r : rows)
      if (r.n == 400) r.mass_outside_5eps = 0.049;
    j = report_json(rows, "poisson-sieve", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "FAIL");
  }

  SECTION("importance-sampling models pass on radius decrease and healthy ess") {
    auto rows = synthetic_rows(
        "binary-dp", ns, 5,
        [](std::size_t n, std::size_t) { return std::pow(static_cast<double>(n), -0.25); },
        400.0);
    nlohmann::json j = report_json(rows, "binary-dp", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "PASS");
    REQUIRE(j.at("property").at("radius_monotone_decreasing").get<bool>());
    REQUIRE(j.at("caveat").get<std::string>().find("importance-sampled") != std::string::npos);

    // flat radii fail the property
    auto flat = synthetic_rows("binary-dp", ns, 5,
                               [](std::size_t, std::size_t) { return 0.3; }, 400.0);
    j = report_json(flat, "binary-dp", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "FAIL");

    // starving the effective sample size fails even with decreasing radii
    auto starved = synthetic_rows(
        "binary-dp", ns, 5,
        [](std::size_t n, std::size_t) { return std::pow(static_cast<double>(n), -0.25); },
        10.0);
    j = report_json(starved, "binary-dp", nlohmann::json::object());
    REQUIRE(j.at("verdict").get<std::string>() == "FAIL");
  }

  SECTION("inconsistent inputs throw") {
    const auto rows = synthetic_rows("white-noise", ns, 5, [](std::size_t n, std::size_t) {
      return std::pow(static_cast<double>(n), -0.5);
    });
    REQUIRE_THROWS_AS(report_json(rows, "spline-regression", nlohmann::json::object()),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(report_json({}, "white-noise", nlohmann::json::object()),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(report_json(rows, "mystery", nlohmann::json::object()),
                      std::invalid_argument);
  }
}

TEST_CASE("single-column csv reader enforces header and numeric payload") {
  const std::string path = "/tmp/ratelab_test_column.csv";
  {
    std::ofstream out(path);
    out << "z\n0.1\n0.5\n0.9\n";
  }
  const std::vector<double> v = read_column_csv(path, "z");
  REQUIRE(v == std::vector<double>{0.1, 0.5, 0.9});

  REQUIRE_THROWS_AS(read_column_csv(path, "w"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "z\n0.1\n0.5 trailing junk\n";
  }
  REQUIRE_THROWS_AS(read_column_csv(path, "z"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "z\n";
  }
  REQUIRE_THROWS_AS(read_column_csv(path, "z"), std::runtime_error);
  REQUIRE_THROWS_AS(read_column_csv("/tmp/no_such_file_ratelab.csv", "z"),
                    std::runtime_error);
  std::remove(path.c_str());
}

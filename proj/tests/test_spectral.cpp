#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oracle_helpers.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/spectral.hpp"
#include "ratelab/stats.hpp"

using namespace ratelab;
using namespace ratelab::spectral;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ks_against_normal(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = normal_cdf(x[i]);
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - c));
    ks = std::max(ks, std::abs(static_cast<double>(i) / n - c));
  }
  return ks;
}

SpectralDensity raised_cosine() {
  return SpectralDensity::from_function([](double u) { return (1.0 + std::cos(kPi * u)) / kTwoPi; });
}

}  // namespace

TEST_CASE("tabulated density evaluates by linear interpolation", "[spectral]") {
  const auto f = SpectralDensity::from_function([](double u) { return 1.0 + u; });
  REQUIRE(f.panels() == 1024);
  REQUIRE(f.eval(0.5) == Catch::Approx(1.5).margin(1e-12));
  REQUIRE(f.eval(0.3) == Catch::Approx(1.3).margin(1e-12));  // exact: integrand is linear
  REQUIRE(f.eval(-0.2) == Catch::Approx(1.0).margin(1e-12));  // clamped
  REQUIRE(f.eval(7.0) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(f.min_value() == Catch::Approx(1.0));
  REQUIRE(f.max_value() == Catch::Approx(2.0));
  REQUIRE_THROWS_AS(SpectralDensity::from_function([](double u) { return u; }),
                    std::invalid_argument);  // zero at the left edge
}

TEST_CASE("autocovariances of reference densities", "[spectral]") {
  // flat density -> white noise: gamma_0 = 1, all other lags zero
  const auto white = SpectralDensity::constant(1.0 / kTwoPi);
  REQUIRE(autocovariance(white, 0) == Catch::Approx(1.0).margin(1e-12));
  for (long h : {1L, 2L, 3L, 7L})
    REQUIRE(autocovariance(white, h) == Catch::Approx(0.0).margin(1e-10));

  // raised cosine: gamma_0 = 1, gamma_1 = 1/2, gamma_2 = 0
  const auto rc = raised_cosine();
  REQUIRE(autocovariance(rc, 0) == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(autocovariance(rc, 1) == Catch::Approx(0.5).margin(1e-10));
  REQUIRE(autocovariance(rc, -1) == Catch::Approx(0.5).margin(1e-10));
  REQUIRE(autocovariance(rc, 2) == Catch::Approx(0.0).margin(1e-10));

  // exponential density: closed-form Fourier coefficients
  // 2 pi int_0^1 cos(h pi u) e^u du = 2 pi (e (-1)^h - 1) / (1 + pi^2 h^2)
  const auto fe = SpectralDensity::from_function([](double u) { return std::exp(u); });
  for (long h : {0L, 1L, 2L, 5L}) {
    const double sign = (h % 2 == 0) ? 1.0 : -1.0;
    const double expect = kTwoPi * (std::numbers::e * sign - 1.0) /
                          (1.0 + kPi * kPi * static_cast<double>(h * h));
    REQUIRE(autocovariance(fe, h) == Catch::Approx(expect).margin(1e-4));
    REQUIRE(autocovariances_exact(fe, static_cast<std::size_t>(h) + 1).back() ==
            Catch::Approx(expect).margin(1e-4));
  }

  // aliasing guard
  REQUIRE_THROWS_AS(autocovariance(white, 257), std::invalid_argument);

  // the closed-form panel integrals are exact for the flat tabulation
  const auto g = autocovariances_exact(white, 16);
  REQUIRE(g[0] == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t h = 1; h < g.size(); ++h)
    REQUIRE(g[h] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("covariance matrix structure and eigenvalue band", "[spectral]") {
  const auto rc = raised_cosine();
  const auto T4 = toeplitz(rc, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const int lag = std::abs(i - j);
      const double expect = lag == 0 ? 1.0 : (lag == 1 ? 0.5 : 0.0);
      REQUIRE(T4(i, j) == Catch::Approx(expect).margin(1e-10));
    }

  // Frobenius identity against the lag-weighted sum
  const std::size_t n = 48;
  std::vector<double> gam(n);
  for (std::size_t h = 0; h < n; ++h) gam[h] = autocovariance(rc, static_cast<long>(h));
  const auto Tn = toeplitz(rc, n);
  REQUIRE(Tn.squaredNorm() ==
          Catch::Approx(toeplitz_frobenius_sq(gam, n)).epsilon(1e-10).margin(1e-10));

  // eigenvalues live in 2 pi [min f, max f]
  const auto f = SpectralDensity::from_function(
      [](double u) { return (1.2 + std::cos(kPi * u)) / kTwoPi; });
  const auto T = toeplitz(f, 64);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  REQUIRE(es.eigenvalues().minCoeff() >= kTwoPi * f.min_value() - 1e-8);
  REQUIRE(es.eigenvalues().maxCoeff() <= kTwoPi * f.max_value() + 1e-8);
}

TEST_CASE("squared L2 gap between densities", "[spectral]") {
  const auto a = SpectralDensity::constant(0.3);
  const auto b = SpectralDensity::constant(0.55);
  REQUIRE(l2_distance_sq(a, b) == Catch::Approx(kTwoPi * 0.25 * 0.25).margin(1e-12));
  const auto f1 = SpectralDensity::from_function(
      [](double u) { return 0.5 + 0.2 * std::sin(3.0 * u); });
  const auto f2 = SpectralDensity::from_function([](double u) { return 0.4 + 0.1 * u; });
  const double expect = kTwoPi * oracle::simpson(
                                     [&](double u) {
                                       const double d = f1.eval(u) - f2.eval(u);
                                       return d * d;
                                     },
                                     0.0, 1.0, 8192);
  REQUIRE(l2_distance_sq(f1, f2) == Catch::Approx(expect).margin(1e-5));
}

TEST_CASE("likelihood-ratio moments: closed form for scaled white noise", "[spectral]") {
  // F = I, G = c I: mean = (n/2)(log c - 1 + 1/c), var = n (c-1)^2 / (2 c^2)
  const std::size_t n = 8;
  const double c = 2.0;
  const auto f = SpectralDensity::constant(1.0 / kTwoPi);
  const auto g = SpectralDensity::constant(c / kTwoPi);
  const auto mm = gaussian_ts_loglik_moments(f, g, n);
  REQUIRE(mm.mean == Catch::Approx(4.0 * std::log(2.0) - 2.0).margin(1e-9));
  REQUIRE(mm.variance == Catch::Approx(1.0).margin(1e-9));
  const auto same = gaussian_ts_loglik_moments(f, f, n);
  REQUIRE(same.mean == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(same.variance == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("likelihood-ratio moments match simulation for a non-flat pair", "[spectral]") {
  const std::size_t n = 8;
  const auto f = SpectralDensity::from_function(
      [](double u) { return (1.0 + 0.5 * std::cos(kPi * u)) / kTwoPi; });
  const auto g = SpectralDensity::constant(1.3 / kTwoPi);
  const auto mm = gaussian_ts_loglik_moments(f, g, n);

  const Eigen::MatrixXd F = toeplitz(f, n);
  const Eigen::MatrixXd G = toeplitz(g, n);
  Eigen::LLT<Eigen::MatrixXd> lltF(F), lltG(G);
  const Eigen::MatrixXd Fi = lltF.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd Gi = lltG.solve(Eigen::MatrixXd::Identity(n, n));
  double ldF = 0.0, ldG = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ldF += 2.0 * std::log(lltF.matrixL()(i, i));
    ldG += 2.0 * std::log(lltG.matrixL()(i, i));
  }

  auto eng = make_engine(derive_seed(29, "ts-llr-mc"));
  const std::size_t R = 100000;
  std::vector<double> llr(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto xs = simulate_gaussian_ts(f, n, eng);
    Eigen::Map<const Eigen::VectorXd> x(xs.data(), static_cast<Eigen::Index>(n));
    llr[r] = -0.5 * (ldF - ldG) - 0.5 * (x.dot(Fi * x) - x.dot(Gi * x));
  }
  const auto mc = oracle::mc_moments(llr);
  REQUIRE(std::abs(mc.mean - mm.mean) <= 4.0 * mc.se);
  REQUIRE(std::abs(mc.var - mm.variance) <= 4.0 * mc.var_se);
}

TEST_CASE("periodogram lines, null input, and white-noise level", "[spectral]") {
  const std::size_t n = 64;
  const auto zeros = periodogram(std::vector<double>(n, 0.0));
  REQUIRE(zeros.size() == n / 2);
  for (double v : zeros) REQUIRE(v == Catch::Approx(0.0).margin(1e-300));

  // pure cosine at Fourier frequency j0: all energy at one ordinate
  const std::size_t j0 = 5;
  std::vector<double> line(n);
  for (std::size_t t = 0; t < n; ++t)
    line[t] = std::cos(kTwoPi * static_cast<double>(j0 * t) / static_cast<double>(n));
  const auto I = periodogram(line);
  REQUIRE(I[j0 - 1] ==
          Catch::Approx(static_cast<double>(n) / (8.0 * kPi)).margin(1e-10));
  for (std::size_t j = 1; j <= n / 2; ++j)
    if (j != j0) REQUIRE(I[j - 1] == Catch::Approx(0.0).margin(1e-10));

  // iid N(0,1) has flat spectrum (2 pi)^{-1}: every ordinate has that mean
  auto eng = make_engine(derive_seed(29, "pgram-white"));
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> ords;
  for (int r = 0; r < 300; ++r) {
    std::vector<double> x(128);
    for (auto& v : x) v = nd(eng);
    const auto Ix = periodogram(x);
    ords.insert(ords.end(), Ix.begin(), Ix.end());
  }
  const auto mm = oracle::mc_moments(ords);
  REQUIRE(std::abs(mm.mean - 1.0 / kTwoPi) <= 4.0 * mm.se);
}

TEST_CASE("full-spectrum energy identity", "[spectral]") {
  auto eng = make_engine(derive_seed(29, "parseval"));
  std::normal_distribution<double> nd(0.0, 2.0);
  std::vector<double> x(100);
  for (auto& v : x) v = 0.7 + nd(eng);
  REQUIRE(parseval_gap(x) <= 1e-8);
}

TEST_CASE("approximate log likelihood matches its termwise definition", "[spectral]") {
  const std::size_t n = 40;
  const auto f = SpectralDensity::from_function(
      [](double u) { return 0.2 + 0.1 * std::cos(kPi * u) + 0.05 * u; });
  auto eng = make_engine(derive_seed(29, "whittle-ll"));
  std::exponential_distribution<double> ex(4.0);
  std::vector<double> ords(n / 2);
  for (auto& v : ords) v = ex(eng);
  double expect = 0.0;
  for (std::size_t j = 1; j <= ords.size(); ++j) {
    const double fv = f.eval(2.0 * static_cast<double>(j) / static_cast<double>(n));
    expect += -std::log(fv) - ords[j - 1] / fv;
  }
  REQUIRE(whittle_loglik(f, ords, n) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("ordinate distances: pins and the exponential sandwich", "[spectral]") {
  const std::size_t n = 64;
  const auto a = SpectralDensity::constant(0.3);
  const auto b = SpectralDensity::constant(0.55);
  REQUIRE(dbar_distance(a, a, n) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(dbar_distance(a, b, n) == Catch::Approx(0.25).margin(1e-12));

  // constants: every ordinate contributes the same squared Hellinger term
  const double r = std::sqrt(0.3) - std::sqrt(0.55);
  REQUIRE(exponential_dn(a, b, n) ==
          Catch::Approx(std::sqrt(2.0 * r * r / 0.85)).margin(1e-12));

  auto eng = make_engine(derive_seed(29, "dn-sandwich"));
  std::uniform_real_distribution<double> uc(0.2, 1.0), ua(0.0, 0.15);
  for (int rep = 0; rep < 20; ++rep) {
    const double c1 = uc(eng), a1 = ua(eng), c2 = uc(eng), a2 = ua(eng);
    const auto f1 = SpectralDensity::from_function(
        [&](double u) { return c1 + a1 * std::cos(kPi * u); });
    const auto f2 = SpectralDensity::from_function(
        [&](double u) { return c2 + a2 * std::sin(2.0 * u); });
    const double m = std::min(f1.min_value(), f2.min_value());
    const double M = std::max(f1.max_value(), f2.max_value());
    const double dn = exponential_dn(f1, f2, n);
    const double dbar = dbar_distance(f1, f2, n);
    REQUIRE(dn >= dbar / (2.0 * M) - 1e-9);
    REQUIRE(dn <= dbar / (2.0 * m) + 1e-9);
  }
}

TEST_CASE("series simulator reproduces known second moments", "[spectral]") {
  // flat spectrum: iid N(0,1)
  auto eng = make_engine(derive_seed(29, "sim-white"));
  const auto white = SpectralDensity::constant(1.0 / kTwoPi);
  const auto x = simulate_gaussian_ts(white, 20000, eng);
  REQUIRE(ks_against_normal(x) <= 1.63 / std::sqrt(20000.0));

  // raised cosine: gamma_0 = 1, gamma_1 = 1/2 recovered from sample moments
  const auto rc = raised_cosine();
  const std::size_t n = 256, R = 400;
  std::vector<double> g0hat(R), g1hat(R);
  for (std::size_t rix = 0; rix < R; ++rix) {
    const auto y = simulate_gaussian_ts(rc, n, eng);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      s0 += y[t] * y[t];
      if (t + 1 < n) s1 += y[t] * y[t + 1];
    }
    g0hat[rix] = s0 / static_cast<double>(n);
    g1hat[rix] = s1 / static_cast<double>(n);
  }
  const auto m0 = oracle::mc_moments(g0hat);
  const auto m1 = oracle::mc_moments(g1hat);
  REQUIRE(std::abs(m0.mean - 1.0) <= 4.0 * m0.se);
  REQUIRE(std::abs(m1.mean - 0.5 * 255.0 / 256.0) <= 4.0 * m1.se);

  // short-memory closed form: x_t = e_t + 0.5 e_{t-1} has gamma = (1.25, 0.5, 0...)
  std::vector<double> gam(128, 0.0);
  gam[0] = 1.25;
  gam[1] = 0.5;
  std::vector<double> h0(R), h1(R), h2(R);
  for (std::size_t rix = 0; rix < R; ++rix) {
    const auto y = simulate_gaussian_ts(gam, 128, eng);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      s0 += y[t] * y[t];
      if (t + 1 < y.size()) s1 += y[t] * y[t + 1];
      if (t + 2 < y.size()) s2 += y[t] * y[t + 2];
    }
    h0[rix] = s0 / 128.0;
    h1[rix] = s1 / 128.0;
    h2[rix] = s2 / 128.0;
  }
  const auto q0 = oracle::mc_moments(h0), q1 = oracle::mc_moments(h1), q2 = oracle::mc_moments(h2);
  REQUIRE(std::abs(q0.mean - 1.25) <= 4.0 * q0.se);
  REQUIRE(std::abs(q1.mean - 0.5 * 127.0 / 128.0) <= 4.0 * q1.se);
  REQUIRE(std::abs(q2.mean - 0.0) <= 4.0 * q2.se);

  // determinism and the documented delegation to the exact autocovariances
  auto e1 = make_engine(derive_seed(29, "sim-repro"));
  auto e2 = make_engine(derive_seed(29, "sim-repro"));
  const auto d1 = simulate_gaussian_ts(rc, 64, e1);
  const auto d2 = simulate_gaussian_ts(autocovariances_exact(rc, 64), 64, e2);
  REQUIRE(d1 == d2);
}

TEST_CASE("ordinate posterior recovers the prior on empty data", "[spectral]") {
  BernsteinDirichletPrior prior;
  const auto f0 = SpectralDensity::constant(0.25);
  auto eng = make_engine(derive_seed(29, "whittle-empty"));
  const auto s = whittle_posterior_is({}, prior, f0, 200, 0.9, 0.1, eng);
  REQUIRE(s.draws == 200);
  REQUIRE(s.ess == Catch::Approx(200.0).margin(1e-9));  // all weights equal
  REQUIRE(s.radius == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.mass_outside_2 == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(s.f0_mid == Catch::Approx(0.25).margin(1e-15));
  REQUIRE_FALSE(s.ess_low);
}

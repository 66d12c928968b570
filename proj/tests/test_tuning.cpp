#include "catch_amalgamated.hpp"

#include "hbopt/tuning.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

using namespace hbopt;
using Catch::Approx;

namespace {

// Smallest positive real root via the eigenvalues of the companion matrix.
std::optional<double> first_positive_root(const CubicPoly& c) {
  Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
  comp(0, 0) = -c.c2 / c.c3;
  comp(0, 1) = -c.c1 / c.c3;
  comp(0, 2) = -c.c0 / c.c3;
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  const Eigen::Vector3cd ev = comp.eigenvalues();
  std::optional<double> best;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ev(i).imag()) > 1e-7 || ev(i).real() <= 0.0) continue;
    if (!best || ev(i).real() < *best) best = ev(i).real();
  }
  return best;
}

}  // namespace

TEST_CASE("cubic coefficients", "[tuning]") {
  const auto c = CubicPoly::make(1.0, 0.25);
  CHECK(c.c3 == Approx(0.5));
  CHECK(c.c2 == Approx(-1.5));
  CHECK(c.c1 == Approx(3.0));
  CHECK(c.c0 == Approx(-1.0));
  CHECK(cubic_p(0.0, 1.0, 0.25) == -1.0);
  CHECK(cubic_p(1.0, 1.0, 0.25) == Approx(1.0));
}

TEST_CASE("max tau matches the companion-matrix root", "[tuning]") {
  for (double kappa : {0.0, 1e-6, 1e-4, 1e-2, 0.1, 0.25, 1.0 / 3.0, 0.9}) {
    const double omega_max = kappa > 0 ? 1.0 / std::sqrt(kappa) : 3.0;
    for (int i = 1; i < 40; ++i) {
      const double omega = std::min(3.0, omega_max) * i / 40.0;
      const auto tau = solve_max_tau(omega, kappa);
      const auto oracle = first_positive_root(CubicPoly::make(omega, kappa));
      REQUIRE(tau.has_value());
      REQUIRE(oracle.has_value());
      CHECK(*tau == Approx(*oracle).margin(1e-9));
      CHECK(cubic_p(*tau, omega, kappa) <= 0.0);
      CHECK(*tau <= omega / 2.0);
    }
  }
  const auto t = solve_max_tau(1.0, 0.25);
  REQUIRE(t);
  CHECK(*t == Approx(0.4039284).margin(1e-6));
}

TEST_CASE("max tau domain", "[tuning]") {
  CHECK_THROWS_AS(solve_max_tau(2.0, 0.25), InvalidArgument);
  CHECK_THROWS_AS(solve_max_tau(0.0, 0.25), InvalidArgument);
  CHECK_THROWS_AS(solve_max_tau(1.0, -0.1), InvalidArgument);
}

TEST_CASE("limit case as kappa vanishes", "[tuning]") {
  CHECK(cubic_p(0.5, 1.5, 0.0) == Approx(0.0).margin(1e-15));
  const auto t0 = solve_max_tau(1.5, 0.0);
  REQUIRE(t0);
  CHECK(*t0 == Approx(0.5).margin(1e-10));
  const auto t = solve_max_tau(1.5, 1e-8);
  REQUIRE(t);
  CHECK(*t >= 0.499);
  CHECK(*t <= 0.5);
  // omega = 3/2 maximizes tau in the limit.
  for (double omega : {1.2, 1.4, 1.49, 1.51, 1.6, 2.0}) CHECK(*solve_max_tau(omega, 0.0) < *t0);
}

TEST_CASE("tau is unimodal in omega and the optimizer finds its peak", "[tuning]") {
  for (double kappa : {1.0 / 3.0, 0.1, 1e-2, 1e-3, 1e-4}) {
    const double hi = 1.0 / std::sqrt(kappa);
    const int n = 1000;
    std::vector<double> taus;
    double best = 0.0;
    for (int i = 1; i < n; ++i) {
      const double omega = std::min(3.0, hi) * i / n;
      if (omega * std::sqrt(kappa) >= 1.0) break;
      taus.push_back(*solve_max_tau(omega, kappa));
      best = std::max(best, taus.back());
    }
    int turns = 0;
    for (std::size_t i = 2; i < taus.size(); ++i) {
      if (taus[i - 1] - taus[i - 2] > 0 && taus[i] - taus[i - 1] < 0) ++turns;
      if (taus[i - 1] - taus[i - 2] < 0) CHECK(taus[i] - taus[i - 1] <= 1e-11);
    }
    CHECK(turns <= 1);
    const auto cert = corollary1_certificate(kappa);
    CHECK(cert.tau >= best - 1e-6);
    CHECK(cert.regime == Regime::kCorollary1Optimal);
  }
}

TEST_CASE("certificate rate identities", "[tuning]") {
  for (double kappa : {1.0 / 3.0, 1e-2, 1e-4}) {
    const auto c = corollary1_certificate(kappa);
    const double rk = std::sqrt(kappa);
    CHECK(c.sigma == Approx(c.tau - c.tau * c.tau * rk));
    CHECK(c.per_iter_factor == Approx(1.0 - c.sigma * rk));
    CHECK(c.alpha == Approx(1.0 - c.omega * rk));
    CHECK(c.certified_decrement() == Approx(-std::log(c.per_iter_factor)));
    CHECK(c.prefactor_C > 1.0);
    CHECK(c.prefactor_C < 2.2);
  }
  const auto c = corollary1_certificate(1e-2);
  CHECK(c.omega == Approx(1.4595).margin(1e-3));
  CHECK(c.tau == Approx(0.4829).margin(1e-3));
  CHECK(c.sigma == Approx(0.4595).margin(1e-3));
  CHECK(c.prefactor_C == Approx(2.0227).margin(1e-3));
}

TEST_CASE("thm1 parameters", "[tuning]") {
  const double k = 1.0 / 3.0;
  const auto p = theorem1_params(k);
  const double c = 2.0 / (3.0 * std::sqrt(3.0));
  CHECK(p.alpha == Approx(1.0 - (5.0 / (3.0 * std::sqrt(3.0))) * std::sqrt(k)));
  CHECK(p.alpha == Approx(4.0 / 9.0));
  CHECK(p.rate == Approx(1.0 - c * std::sqrt(k)));
  CHECK(p.rate == Approx(7.0 / 9.0));
  CHECK(p.prefactor == Approx(4.0 / 3.0));
  const auto cert = theorem1_certificate(0.25);
  CHECK(cert.sigma == cert.tau);
  CHECK(cert.regime == Regime::kTheorem1);
  CHECK_THROWS_AS(theorem1_params(0.4), InvalidArgument);
  CHECK_THROWS_AS(theorem1_params(0.0), InvalidArgument);
}

TEST_CASE("Phi polynomial", "[tuning]") {
  CHECK(lemma8_phi(1.5, 0.0) == Approx(-10.5625));
  for (double kappa : {1e-6, 1e-3, 0.05, 0.1}) {
    for (double omega : {1.5, 2.0, 0.9 / std::sqrt(kappa)}) {
      const double direct = 27.0 * std::pow(omega, 3) * cubic_p(2.0 / (3.0 * omega), omega, kappa);
      CHECK(lemma8_phi(omega, kappa) == Approx(direct).epsilon(1e-10).margin(1e-10));
      CHECK(lemma8_phi(omega, kappa) < 0.0);
    }
  }
}

TEST_CASE("cor2 certificates", "[tuning]") {
  // alpha = 9/10 with kappa = 1/225: coefficient 20/3 (1 - 20/3 * 1/15) = 100/27.
  const auto c = corollary2_certificate(0.1, 1.0 / 225.0);
  REQUIRE(c.cor2_tau);
  CHECK(*c.cor2_tau == Approx(100.0 / 27.0));
  CHECK(*c.cor2_exponent == Approx(100.0 / 27.0 / 225.0));
  CHECK(c.alpha == Approx(0.9));
  CHECK(c.tau == Approx(2.0 / (3.0 * c.omega)));
  for (double kappa : {1e-4, 1e-3}) {
    const auto d = corollary2_certificate(0.1, kappa);
    CHECK(*d.cor2_tau >= 100.0 / 27.0);
    CHECK(*d.cor2_tau <= 20.0 / 3.0);
  }
  // Tenfold overestimate of mu.
  const double kappa = 1e-4;
  const auto o = corollary2_certificate(1.5 * std::sqrt(10.0 * kappa), kappa);
  CHECK(*o.cor2_exponent / std::sqrt(kappa) == Approx(0.1208).margin(5e-4));
  CHECK(o.per_iter_factor < 1.0);
  CHECK_THROWS_AS(corollary2_certificate(0.01, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(corollary2_certificate(0.5, 0.2), InvalidArgument);
}

TEST_CASE("iteration predictions", "[tuning]") {
  RateCertificate c;
  c.prefactor_C = 2.0;
  c.per_iter_factor = 0.5;
  CHECK(iterations_to_accuracy(c, 1.0 / 64.0) == 7);
  CHECK(iterations_to_accuracy(c, 3.0) == 0);
  c.per_iter_factor = 1.0;
  CHECK_THROWS_AS(iterations_to_accuracy(c, 1e-3), InvalidArgument);
}

TEST_CASE("regime names", "[tuning]") {
  CHECK(regime_from_string("thm1") == Regime::kTheorem1);
  CHECK(regime_from_string("cor1") == Regime::kCorollary1Optimal);
  CHECK(regime_from_string(to_string(Regime::kCorollary2Overestimated)) ==
        Regime::kCorollary2Overestimated);
  CHECK_THROWS_AS(regime_from_string("fast"), InvalidArgument);
}

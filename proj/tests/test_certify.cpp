#include "catch_amalgamated.hpp"

#include "hbopt/certify.hpp"
#include "hbopt/schemes.hpp"
#include "hbopt/tuning.hpp"

#include <cmath>

using namespace hbopt;
using Catch::Approx;

namespace {

CompositeProblem quadratic(double kappa, std::uint64_t seed = 7) {
  return make_degenerate_least_squares(20, 30, 12, seed, geometric_profile(12, kappa));
}

std::vector<Vector> vfista_iterates(const CompositeProblem& p, double alpha, long iters,
                                    std::optional<double> step = std::nullopt) {
  SchemeConfig cfg;
  cfg.kind = SchemeKind::kVFista;
  cfg.alpha = alpha;
  cfg.max_iter = iters;
  cfg.keep_iterates = true;
  cfg.step = step;
  return run(p, cfg, 3.0 * GaussianStream(99).vector(p.dim())).iterates;
}

}  // namespace

TEST_CASE("initial energies follow the x_{-1} = x_0 convention", "[certify]") {
  const double kappa = 0.25;
  const auto p = quadratic(kappa);
  const auto xs = vfista_iterates(p, theorem1_params(kappa).alpha, 5);
  const auto e1 = energy_theorem1(p, xs, kappa);
  const double w0 = 2.0 / p.lipschitz() * (evaluate_total(p, xs[0]) - p.ground_truth().f_star);
  const double h0 = (xs[0] - p.project(xs[0])).squaredNorm();
  const double lambda = std::sqrt(kappa / 3.0);
  CHECK(e1.w[0] == Approx(w0));
  CHECK(e1.delta[0] == 0.0);
  CHECK(e1.e1[0] == Approx(w0 + lambda * lambda * h0));

  const auto c = corollary1_certificate(1e-2);
  const auto q = quadratic(1e-2);
  const auto ys = vfista_iterates(q, c.alpha, 5);
  const auto e2 = energy_theorem2(q, ys, c.omega, c.tau, 1e-2);
  const double w = 2.0 / q.lipschitz() * evaluate_total(q, ys[0]);
  const double h = (ys[0] - q.project(ys[0])).squaredNorm();
  const double lam = (c.omega - c.tau) * 0.1;
  const double a = 1.0 - c.omega * 0.1;
  CHECK(e2.e2[0] == Approx(w + a * lam * lam * h + lam * (1.0 - a) * (1.0 - a) * h));
  CHECK(e2.nu == Approx(c.tau * 0.1));
}

TEST_CASE("energies agree with an independent recomputation", "[certify]") {
  const double kappa = 0.1;
  const auto p = quadratic(kappa, 3);
  const auto xs = vfista_iterates(p, 0.7, 60);
  const auto et = energy_theorem1(p, xs, kappa);
  const double lambda = std::sqrt(kappa / 3.0);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const Vector& x = xs[n];
    const Vector& xp = xs[n == 0 ? 0 : n - 1];
    const Vector xs_p = p.project(xp);
    const double w = 2.0 / p.lipschitz() * (evaluate_total(p, x) - p.ground_truth().f_star);
    const double expect = w + (x - xp + lambda * (xp - xs_p)).squaredNorm();
    CHECK(et.e1[n] == Approx(expect).epsilon(1e-12).margin(1e-14));
    const Vector dstar = p.project(x) - xs_p;
    CHECK(et.gamma[n] == Approx(dstar.squaredNorm()).margin(1e-20));
    CHECK(et.cross_curr[n] == Approx((x - p.project(x)).dot(dstar)).margin(1e-14));
  }
}

TEST_CASE("compliant thm1 runs pass every check", "[certify]") {
  for (double kappa : {0.25, 1e-2}) {
    const auto p = quadratic(kappa);
    const auto t1 = theorem1_params(kappa);
    const auto xs = vfista_iterates(p, t1.alpha, 600);
    const auto et = energy_theorem1(p, xs, kappa);
    CHECK(check_theorem1_decay(et, kappa).pass);
    CHECK(check_lemma7(et).pass);
    CHECK(check_projection_signs(et).pass);
    CHECK(check_lemma_tech2(et, t1.alpha).pass);
    CHECK(check_step_envelope_theorem1(et).pass);
    const auto rep = check_theorem1_decay(et, kappa);
    CHECK(rep.checked > 1000);
    CHECK_FALSE(rep.first_violation_n);
  }
}

TEST_CASE("compliant cor1 runs pass every check", "[certify]") {
  for (double kappa : {0.25, 1e-2, 1e-4}) {
    const auto c = corollary1_certificate(kappa);
    const auto p = quadratic(kappa);
    const auto xs = vfista_iterates(p, c.alpha, 800);
    const auto et = energy_theorem2(p, xs, c.omega, c.tau, kappa);
    CHECK(check_theorem2_decay(et).pass);
    CHECK(check_step_envelope_theorem2(et).pass);
    CHECK(check_lemma_tech2(et, c.alpha).pass);
    std::vector<double> gaps;
    for (double w : et.w) gaps.push_back(w);
    CHECK(check_bound_envelope(gaps, c.prefactor_C, c.per_iter_factor).pass);
  }
}

TEST_CASE("over-aggressive momentum is caught", "[certify]") {
  const double kappa = 0.25;
  const auto p = quadratic(kappa);
  const auto xs = vfista_iterates(p, 0.999, 400);
  const auto et = energy_theorem1(p, xs, kappa);
  const auto rep = check_theorem1_decay(et, kappa);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.first_violation_n);
  CHECK(*rep.first_violation_n >= 1);
  CHECK(rep.max_residual > rep.slack_used);
}

TEST_CASE("the descent lemma needs s = 1/L", "[certify]") {
  const double kappa = 0.25;
  const auto p = quadratic(kappa);
  const double alpha = theorem1_params(kappa).alpha;
  const auto good = vfista_iterates(p, alpha, 200);
  CHECK(check_lemma_tech2(energy_theorem1(p, good, kappa), alpha).pass);
  const auto bad = vfista_iterates(p, alpha, 200, 1.9 / p.lipschitz());
  CHECK_FALSE(check_lemma_tech2(energy_theorem1(p, bad, kappa), alpha).pass);
}

TEST_CASE("checkers reject inputs outside their domain", "[certify]") {
  const auto p = quadratic(0.25);
  const auto xs = vfista_iterates(p, 0.5, 5);
  const auto et = energy_theorem1(p, xs, 0.25);
  CHECK_THROWS_AS(check_theorem1_decay(et, 0.4), InvalidArgument);
  CHECK_THROWS_AS(check_theorem2_decay(et), InvalidArgument);
  const auto lasso = make_lasso(Matrix::Identity(2, 2), Vector::Ones(2), 0.1);
  CHECK_THROWS_AS(energy_base(lasso, {Vector::Zero(2)}), InvalidArgument);
  CHECK_THROWS_AS(energy_theorem2(p, xs, 3.0, 0.5, 0.25), InvalidArgument);
}

TEST_CASE("bound envelope flags a synthetic violation", "[certify]") {
  std::vector<double> gaps;
  for (int n = 0; n < 100; ++n) gaps.push_back(std::pow(0.9, n));
  CHECK(check_bound_envelope(gaps, 1.0, 0.9).pass);
  gaps[40] *= 1.01;
  const auto rep = check_bound_envelope(gaps, 1.0, 0.9);
  CHECK_FALSE(rep.pass);
  CHECK(*rep.first_violation_n == 40);
  const auto doc = to_json(rep);
  CHECK(doc.at("first_violation_n") == 40);
  CHECK(doc.at("pass") == false);
}

TEST_CASE("two-point identities hold on random quadruples", "[certify][property]") {
  GaussianStream rng(11);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vector a = rng.vector(5), b = rng.vector(5), c = rng.vector(5), d = rng.vector(5);
    const auto r = check_lemma_tech1(a, b, c, d);
    worst = std::max(worst, std::max(std::abs(r.first), std::abs(r.second)) / r.scale);
  }
  CHECK(worst <= 1e-12);
  // A wrong quadruple ordering breaks the identity.
  Vector a(1), b(1), c(1), d(1);
  a << 1.0;
  b << 0.0;
  c << 0.0;
  d << 2.0;
  const auto r = check_lemma_tech1(a, b, c, d);
  CHECK(std::abs(r.first) < 1e-15);
  CHECK(std::abs(r.second) < 1e-15);
}

TEST_CASE("tail rate fits", "[certify]") {
  std::vector<double> g;
  for (int n = 0; n < 400; ++n) g.push_back(std::pow(0.9, n));
  const auto fit = fit_tail_rate(g, 1.0);
  REQUIRE(fit.slope);
  CHECK(*fit.slope == Approx(std::log(0.9)).epsilon(1e-10));
  CHECK(*fit.decrement() == Approx(-std::log(0.9)));
  CHECK(fit.r_squared == Approx(1.0));
  CHECK_FALSE(fit.floor_hit);
  CHECK(fit.n_hi < 400);

  const auto flat = fit_tail_rate(std::vector<double>(80, 0.0), 1.0);
  CHECK(flat.floor_hit);
  CHECK_FALSE(flat.slope);

  std::vector<double> noisy;
  for (int n = 0; n < 200; ++n) noisy.push_back(n % 2 ? 1e-3 : 1.0);
  const auto bad = fit_tail_rate(noisy, 1.0);
  CHECK_FALSE(bad.slope);
  CHECK(bad.r_squared < 0.99);

  CHECK_THROWS_AS(fit_tail_rate(std::vector<double>(10, 1.0), 1.0), InvalidArgument);
}

TEST_CASE("step norm envelope", "[certify]") {
  std::vector<double> s;
  for (int n = 0; n < 200; ++n) s.push_back(std::exp(-0.05 * n));
  CHECK(step_norm_envelope(s, 0.04).bounded);
  CHECK_FALSE(step_norm_envelope(s, 0.06).bounded);
}

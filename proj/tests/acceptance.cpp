// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "hbopt/certify.hpp"
#include "hbopt/hbf_ode.hpp"
#include "hbopt/problems.hpp"
#include "hbopt/schemes.hpp"
#include "hbopt/tuning.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hbopt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Reference rows: kappa, omega, tau, sigma, C.
struct TableRow {
  double kappa, omega, tau, sigma, c;
};
const TableRow kTable[] = {
    {1.0, 1.2, 0.39, 0.23, 2.04},      {1.0 / 3.0, 1.32, 0.42, 0.31, 2.1},
    {1e-1, 1.39, 0.45, 0.38, 2.07},    {1e-2, 1.46, 0.48, 0.45, 2.03},
    {1e-3, 1.49, 0.494, 0.486, 2.02},  {1e-4, 1.495, 0.498, 0.495, 2.002},
};

Outcome table_reproduction() {
  Outcome o{true, ""};
  std::ostringstream s;
  for (const auto& row : kTable) {
    const auto c = corollary1_certificate(row.kappa);
    const bool ok = std::abs(c.omega - row.omega) <= 0.01 && std::abs(c.tau - row.tau) <= 0.01 &&
                    std::abs(c.sigma - row.sigma) <= 0.01 && std::abs(c.prefactor_C - row.c) <= 0.05;
    if (!ok) {
      o.pass = false;
      s << fmt("k=%.3g got (%.4f, %.4f, %.4f, %.4f) table (%g, %g, %g, %g); ", row.kappa, c.omega, c.tau,
               c.sigma, c.prefactor_C, row.omega, row.tau, row.sigma, row.c);
    }
  }
  o.detail = o.pass ? "all six rows within tolerance" : s.str();
  return o;
}

Outcome limit_case() {
  const auto tau = solve_max_tau(1.5, 1e-8);
  if (!tau) return {false, "no root"};
  return {*tau >= 0.499 && *tau <= 0.5, fmt("tau = %.10f", *tau)};
}

CompositeProblem ls(double kappa, int m = 20, int n = 30, int rank = 12, std::uint64_t seed = 7) {
  return make_degenerate_least_squares(m, n, rank, seed, geometric_profile(rank, kappa));
}

std::vector<Vector> vfista(const CompositeProblem& p, double alpha, long iters, bool keep) {
  SchemeConfig cfg;
  cfg.kind = SchemeKind::kVFista;
  cfg.alpha = alpha;
  cfg.max_iter = iters;
  cfg.keep_iterates = keep;
  return run(p, cfg, 3.0 * GaussianStream(8).vector(p.dim())).iterates;
}

Outcome theorem1_bound() {
  const double kappa = 0.25;
  const auto p = ls(kappa);
  const auto t1 = theorem1_params(kappa);
  SchemeConfig cfg;
  cfg.kind = SchemeKind::kVFista;
  cfg.alpha = t1.alpha;
  cfg.max_iter = 2000;
  const auto r = run(p, cfg, 3.0 * GaussianStream(8).vector(p.dim()));
  const auto rep = check_bound_envelope(r.gaps(), t1.prefactor, t1.rate, 1e-9, "theorem1_bound");
  return {rep.pass && rep.checked == 2001,
          fmt("%ld points, max excess %.3e (slack %.3e)", rep.checked, rep.max_residual, rep.slack_used)};
}

Outcome lyapunov_suites() {
  std::ostringstream s;
  bool pass = true;
  for (double kappa : {0.25, 1e-2, 1e-4}) {
    const auto p = ls(kappa);
    const auto xs1 = vfista(p, theorem1_params(kappa).alpha, 600, true);
    const auto r1 = check_theorem1_decay(energy_theorem1(p, xs1, kappa), kappa);
    const auto c = corollary1_certificate(kappa);
    const auto xs2 = vfista(p, c.alpha, 600, true);
    const auto r2 = check_theorem2_decay(energy_theorem2(p, xs2, c.omega, c.tau, kappa));
    pass = pass && r1.pass && r2.pass;
    s << fmt("k=%g E1 %s E2 %s; ", kappa, r1.pass ? "ok" : "VIOLATED", r2.pass ? "ok" : "VIOLATED");
  }
  return {pass, s.str()};
}

Outcome lemma_identity() {
  GaussianStream rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vector a = rng.vector(5), b = rng.vector(5), c = rng.vector(5), d = rng.vector(5);
    const auto r = check_lemma_tech1(a, b, c, d);
    worst = std::max(worst, std::max(std::abs(r.first), std::abs(r.second)) / r.scale);
  }
  return {worst <= 1e-12, fmt("worst relative residual %.3e", worst)};
}

Outcome lemma8_grid() {
  long violations = 0;
  double worst = -INFINITY;
  for (int j = 0; j < 50; ++j) {
    const double kappa = 0.1 * std::pow(10.0, -6.0 * (49 - j) / 49.0);
    const double hi = 0.9 / std::sqrt(kappa);
    for (int i = 0; i < 200; ++i) {
      const double omega = 1.5 + (hi - 1.5) * i / 199.0;
      const double v = cubic_p(2.0 / (3.0 * omega), omega, kappa);
      worst = std::max(worst, v);
      if (!(v < 0.0) || !(lemma8_phi(omega, kappa) < 0.0)) ++violations;
    }
  }
  return {violations == 0, fmt("%ld sign violations, max P = %.4e", violations, worst)};
}

long iters_to(const CompositeProblem& p, SchemeConfig cfg, const Vector& x0, double eps) {
  cfg.max_iter = 200000;
  cfg.stop_gap = eps;
  const auto r = run(p, cfg, x0);
  return r.stop_reason == StopReason::kGapReached ? r.records.back().n : -1;
}

Outcome rate_separation() {
  const double kappa = 1e-4;
  const auto p = ls(kappa, 30, 40, 20, 7);
  const Vector x0 = GaussianStream(8).vector(40);
  SchemeConfig fb;
  SchemeConfig rs;
  rs.kind = SchemeKind::kFistaRestart;
  SchemeConfig vf;
  vf.kind = SchemeKind::kVFista;
  vf.alpha = corollary1_certificate(kappa).alpha;
  const long n_fb = iters_to(p, fb, x0, 1e-8);
  const long n_rs = iters_to(p, rs, x0, 1e-8);
  const long n_vf = iters_to(p, vf, x0, 1e-8);
  const bool pass = n_fb > 0 && n_rs > 0 && n_vf > 0 && n_vf <= 0.1 * n_fb && n_vf <= n_rs;
  return {pass, fmt("iterations to 1e-8: V-FISTA %ld, restart %ld, FB %ld", n_vf, n_rs, n_fb)};
}

Outcome overestimate_robustness() {
  const double kappa = 1e-4;
  const auto p = ls(kappa, 30, 40, 20, 7);
  const Vector x0 = GaussianStream(8).vector(40);
  SchemeConfig cfg;
  cfg.kind = SchemeKind::kVFista;
  cfg.alpha = 1.0 - 1.5 * std::sqrt(10.0 * kappa);
  cfg.max_iter = 100000;
  cfg.stop_gap = 1e-13;
  const auto r = run(p, cfg, x0);
  const auto fit = fit_tail_rate(r.gaps(), std::abs(evaluate_total(p, x0)));
  const double need = 0.9 * 0.12 * std::sqrt(kappa);
  if (!fit.decrement()) return {false, fmt("no reliable fit (r^2 = %.4f)", fit.r_squared)};
  return {*fit.decrement() >= need,
          fmt("fitted decrement %.5f over [%ld, %ld], required %.5f", *fit.decrement(), fit.n_lo, fit.n_hi, need)};
}

Outcome ode_envelopes() {
  const std::vector<double> sv = {2.0, 1.0};
  const auto p = make_degenerate_least_squares(3, 3, 2, 3, sv);
  const double mu = *p.ground_truth().mu;
  OdeConfig cfg;
  cfg.t_end = 40.0;
  cfg.dt = 1e-3;
  cfg.x0 = GaussianStream(4).vector(3);
  cfg.v0 = Vector::Zero(3);
  cfg.alpha_c = theorem3_friction(mu);
  const auto r3 = check_theorem3(integrate_hbf(p, cfg), mu);
  cfg.alpha_c = proposition1_friction(mu);
  const auto r1 = check_proposition1(integrate_hbf(p, cfg), mu);
  return {std::abs(mu - 1.0) < 1e-12 && r3.pass && r1.pass,
          fmt("mu = %g, thm3 envelope %s (%ld pts), prop1 envelope %s (%ld pts)", mu,
              r3.pass ? "ok" : "VIOLATED", r3.checked, r1.pass ? "ok" : "VIOLATED", r1.checked)};
}

Outcome integrator_order() {
  const double mu = 100.0;
  const double w = std::sqrt(mu);
  Matrix a(1, 1);
  a << w;
  const auto p = make_least_squares(a, Vector::Zero(1));
  std::vector<double> errs;
  for (int k = 0; k <= 6; ++k) {
    OdeConfig cfg;
    cfg.alpha_c = 2.0 * w;
    cfg.t_end = 1.0;
    cfg.dt = 1e-2 / std::pow(2.0, k);
    cfg.x0 = Vector::Ones(1);
    cfg.v0 = Vector::Zero(1);
    const auto traj = integrate_hbf(p, cfg);
    double e = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.t[i];
      e = std::max(e, std::abs(traj.x[i](0) - (1.0 + w * t) * std::exp(-w * t)));
    }
    errs.push_back(e);
  }
  bool pass = true;
  std::ostringstream s;
  s << "orders";
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    pass = pass && order >= 3.7 && order <= 4.3;
    s << fmt(" %.3f", order);
  }
  return {pass, s.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "parameter table reproduction", 1.0, table_reproduction},
      {2, "limit case tau(3/2, 1e-8)", 1.0, limit_case},
      {3, "thm1 pointwise bound", 1.0, theorem1_bound},
      {4, "Lyapunov decay suites", 5.0, lyapunov_suites},
      {5, "two-point identity oracle", 1.0, lemma_identity},
      {6, "cubic negativity grid", 1.0, lemma8_grid},
      {7, "rate separation", 30.0, rate_separation},
      {8, "overestimated-mu robustness", 30.0, overestimate_robustness},
      {9, "ODE envelopes", 10.0, ode_envelopes},
      {10, "integrator order", 5.0, integrator_order},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s [%.2fs/%.0fs%s] %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                c.budget_s, in_time ? "" : " over budget", o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

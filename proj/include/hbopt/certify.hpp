#pragma once

#include "hbopt/problems.hpp"
#include "hbopt/tuning.hpp"

#include <json.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hbopt {

/// Per-iteration quantities of the discrete Lyapunov analysis, with the
/// convention x_{-1} = x_0.
struct EnergyTrace {
  std::vector<double> w;      // (2/L)(F(x_n) - F*)
  std::vector<double> h;      // ||x_n - x*_n||^2
  std::vector<double> delta;  // ||x_n - x_{n-1}||^2
  std::vector<double> gamma;  // ||x*_n - x*_{n-1}||^2
  std::vector<double> cross_curr;  // <x_n - x*_n, x*_n - x*_{n-1}>
  std::vector<double> cross_prev;  // <x_{n-1} - x*_{n-1}, x*_n - x*_{n-1}>
  std::vector<double> e1;
  std::vector<double> e2;
  /// Coordinate scale used for the projection sign tolerances.
  double scale = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  double nu = 0.0;

  std::size_t size() const { return w.size(); }
};

struct CheckReport {
  std::string name;
  bool pass = true;
  std::optional<long> first_violation_n;
  /// max over n of (lhs - rhs); -inf when nothing was checked.
  double max_residual = -std::numeric_limits<double>::infinity();
  double slack_used = 0.0;
  long checked = 0;

  /// Violation when residual > slack_used.
  void observe(long n, double residual);
  /// Violation when residual > tolerance.
  void observe(long n, double residual, double tolerance);
};

nlohmann::json to_json(const CheckReport& r);

/// Raw quantities only (no energy). Needs a projection oracle.
EnergyTrace energy_base(const CompositeProblem& p, const std::vector<Vector>& iterates);

/// E1_n = w_n + ||x_n - x_{n-1} + lambda (x_{n-1} - x*_{n-1})||^2, lambda = sqrt(kappa/3).
EnergyTrace energy_theorem1(const CompositeProblem& p, const std::vector<Vector>& iterates,
                            double kappa);

/// E2_n = w_n + alpha ||x_n - x_{n-1} + lambda (x_n - x*_n)||^2 + lambda (1-alpha)^2 h_n
/// with alpha = 1 - omega sqrt(k), lambda = (omega - tau) sqrt(k), nu = tau sqrt(k).
EnergyTrace energy_theorem2(const CompositeProblem& p, const std::vector<Vector>& iterates,
                            double omega, double tau, double kappa);

/// E1_{n+1} <= (1 - 2/(3 sqrt 3) sqrt k) E1_n + 1e-10 E1_0, and
/// w_n <= 4/3 rate^n w_0 (relative slack 1e-9).
CheckReport check_theorem1_decay(const EnergyTrace& et, double kappa);

/// E2_{n+1} - E2_n + nu E2_{n+1} <= 1e-10 E2_0 and E2_n <= (1 - nu + nu^2)^n E2_0.
CheckReport check_theorem2_decay(const EnergyTrace& et);

/// gap_n <= C factor^n gap_0 + rel_slack gap_0 for every n.
CheckReport check_bound_envelope(const std::vector<double>& gaps, double prefactor, double factor,
                                 double rel_slack = 1e-9, const std::string& name = "bound_envelope");

struct Lemma5Residuals {
  double first = 0.0;
  double second = 0.0;
  double scale = 0.0;
};

/// Residuals of both algebraic identities for (x_n, x_{n-1}, x*_n, x*_{n-1}).
Lemma5Residuals check_lemma_tech1(const Vector& xn, const Vector& xprev, const Vector& xsn,
                                  const Vector& xsprev);

/// Both descent inequalities per iteration for a V-FISTA run with s = 1/L.
CheckReport check_lemma_tech2(const EnergyTrace& et, double alpha);

/// h_n - h_{n-1} <= (sqrt 3 / sqrt k)(E1_n - w_n).
CheckReport check_lemma7(const EnergyTrace& et);

/// <x_n - x*_n, x*_n - x*_{n-1}> >= -tol and <x_{n-1} - x*_{n-1}, x*_n - x*_{n-1}> <= tol.
CheckReport check_projection_signs(const EnergyTrace& et);

/// delta_n <= (2 rho + 2/(lambda^2 k)) rho^{n-1} E1_0 for n >= 1.
CheckReport check_step_envelope_theorem1(const EnergyTrace& et);
/// delta_n <= (2/alpha + 2/(lambda^2 k)) rho2^n E2_0.
CheckReport check_step_envelope_theorem2(const EnergyTrace& et);

/// Running maximum of ||x_n - x_{n-1}|| e^{c n}; bounded when it stops growing
/// over the second half of the run (within `growth`).
struct EnvelopeSummary {
  double sup = 0.0;
  double sup_first_half = 0.0;
  bool bounded = true;
};
EnvelopeSummary step_norm_envelope(const std::vector<double>& step_norms, double exponent,
                                   double growth = 1.0 + 1e-9);

struct RateFit {
  long n_lo = 0;
  long n_hi = 0;
  std::optional<double> slope;
  double r_squared = 0.0;
  bool floor_hit = false;

  /// -slope, the fitted per-iteration log decrement.
  std::optional<double> decrement() const;
};

/// Least-squares line through log(gap_n) over the last 60% of the records
/// above 1e2 eps |F(x_0)|. floor_hit when fewer than 21 iterations remain.
RateFit fit_tail_rate(const std::vector<double>& gaps, double f_x0_abs);

nlohmann::json to_json(const RateFit& fit);

}  // namespace hbopt

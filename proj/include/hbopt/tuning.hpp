#pragma once

#include "hbopt/common.hpp"

#include <optional>
#include <string>

namespace hbopt {

/// P(tau; omega, kappa) = (1 - w)tau^3 - omega(2 - w)tau^2 + (omega^2 + 2)tau - omega,
/// with w = omega sqrt(kappa).
struct CubicPoly {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  static CubicPoly make(double omega, double kappa);
  double operator()(double tau) const { return ((c3 * tau + c2) * tau + c1) * tau + c0; }
};

double cubic_p(double tau, double omega, double kappa);

enum class Regime { kTheorem1, kCorollary1Optimal, kCorollary2Overestimated };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

struct RateCertificate {
  double kappa = 0.0;
  double omega = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double prefactor_C = 1.0;
  /// Contraction of the gap bound per iteration, 1 - sigma sqrt(kappa).
  double per_iter_factor = 1.0;
  /// Momentum 1 - omega sqrt(kappa).
  double alpha = 0.0;
  Regime regime = Regime::kCorollary1Optimal;
  /// cor2 only: theta, the stated rate coefficient and its exponent tau*kappa.
  std::optional<double> theta;
  std::optional<double> cor2_tau;
  std::optional<double> cor2_exponent;

  /// -log(per_iter_factor).
  double certified_decrement() const;
};

struct Theorem1Params {
  double alpha;
  double rate;
  double prefactor;
};

/// 0 < kappa <= 1/3.
Theorem1Params theorem1_params(double kappa);
RateCertificate theorem1_certificate(double kappa);

/// Largest tau with P(tau) <= 0 on [0, first positive root]. Needs
/// omega > 0 and omega sqrt(kappa) < 1; kappa = 0 is the limit case.
/// Returns nullopt when no sign change is found in (0, omega/2].
std::optional<double> solve_max_tau(double omega, double kappa);

/// Certificate for the omega in (0, 1/sqrt(kappa)) maximizing solve_max_tau.
RateCertificate corollary1_certificate(double kappa);
/// Certificate from the exact optimum at a given omega.
RateCertificate certificate_at(double omega, double kappa, Regime regime);

/// alpha = 1 - theta with theta in [3/2 sqrt(kappa), 1), kappa <= 1/10.
RateCertificate corollary2_certificate(double theta, double kappa);

/// Phi(omega; kappa) = -9w^4 + 12w^3 sqrt(k) + 12w^2 - 8w sqrt(k) + 8.
double lemma8_phi(double omega, double kappa);

/// ceil(log(C/eps) / -log(per_iter_factor)); 0 when C <= eps.
long iterations_to_accuracy(const RateCertificate& cert, double eps);

}  // namespace hbopt

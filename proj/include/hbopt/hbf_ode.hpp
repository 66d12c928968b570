#pragma once

#include "hbopt/certify.hpp"
#include "hbopt/problems.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hbopt {

struct OdeConfig {
  /// Friction alpha in x'' + alpha x' + grad F(x) = 0.
  double alpha_c = 0.0;
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  Vector x0;
  Vector v0;
};

/// (2 - sqrt(2)/2) sqrt(mu).
double theorem3_friction(double mu);
/// (3 / sqrt 2) sqrt(mu).
double proposition1_friction(double mu);

struct OdeTrajectory {
  OdeConfig config;
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> v;
  std::vector<double> f_gap;
  /// F(x(t)) + 1/2 ||x'(t)||^2.
  std::vector<double> mechanical;
  /// Lyapunov energy with lambda = sqrt(mu), xi = -(1 - sqrt(2)/2) mu; empty
  /// without a projection oracle and mu.
  std::vector<double> energy;
  /// F(x(t0)) - F* + 1/2 ||x'(t0)||^2.
  double m0 = 0.0;
  std::optional<double> mu;

  std::size_t size() const { return t.size(); }
};

/// Classical RK4 on (x, v)' = (v, -alpha v - grad F(x)). Needs h = 0 and
/// dt <= 0.1 / sqrt(L).
OdeTrajectory integrate_hbf(const CompositeProblem& p, const OdeConfig& cfg);

/// F - F* <= (11/2 - 2 sqrt 2) M0 e^{-(2 - sqrt 2) sqrt(mu)(t - t0)} and
/// ||x'||^2 <= 4(1 + 1/(sqrt 2 - 1)) E(t0) e^{-(2 - sqrt 2) sqrt(mu)(t - t0)}, 5% slack.
CheckReport check_theorem3(const OdeTrajectory& traj, double mu);

/// F - F* <= 39 M0 e^{-sqrt(2 mu)(t - t0)}, 5% slack.
CheckReport check_proposition1(const OdeTrajectory& traj, double mu);

struct ContinuousEnergyReport {
  std::vector<double> energy;
  CheckReport decay;
  /// <x', x*'> >= -tol with x*' from finite differences of the projection.
  CheckReport velocity_sign;
  /// |<x - x*, x*'>| <= tol (affine solution sets).
  CheckReport normal_orthogonality;
};

ContinuousEnergyReport energy_continuous(const CompositeProblem& p, const OdeTrajectory& traj,
                                         double mu);

/// F(x) + 1/2 ||x'||^2 non-increasing up to 1e-8 of its initial value.
CheckReport check_mechanical_energy(const OdeTrajectory& traj);

/// `t,fgap,speed,energy`.
std::string trajectory_csv(const OdeTrajectory& traj);

}  // namespace hbopt

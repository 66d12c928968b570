#include "hbopt/hbf_ode.hpp"

#include "hbopt/trace_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hbopt {

namespace {

constexpr double kOdeSlack = 0.05;
constexpr double kFrictionMatch = 1e-9;
const double kSqrt2 = std::sqrt(2.0);

double lyapunov(const CompositeProblem& p, const Vector& x, const Vector& v, double gap, double mu) {
  const Vector u = x - p.project(x);
  const double lambda = std::sqrt(mu);
  const double xi = -(1.0 - kSqrt2 / 2.0) * mu;
  return gap + 0.5 * (lambda * u + v).squaredNorm() + xi * u.squaredNorm();
}

void require_friction(const OdeTrajectory& traj, double expected, const char* what) {
  const double a = traj.config.alpha_c;
  if (std::abs(a - expected) > kFrictionMatch * std::max(1.0, expected)) {
    throw InvalidArgument(std::string("friction does not match the ") + what + " choice");
  }
}

}  // namespace

double theorem3_friction(double mu) { return (2.0 - kSqrt2 / 2.0) * std::sqrt(mu); }
double proposition1_friction(double mu) { return 3.0 / kSqrt2 * std::sqrt(mu); }

OdeTrajectory integrate_hbf(const CompositeProblem& p, const OdeConfig& cfg) {
  require(p.nonsmooth_name() == "zero", "the HBF system needs a smooth objective (h = 0)");
  require(cfg.alpha_c >= 0.0, "friction must be nonnegative");
  require(cfg.dt > 0.0 && cfg.t_end > cfg.t0, "need dt > 0 and t_end > t0");
  require(cfg.dt <= 0.1 / std::sqrt(p.lipschitz()) * (1.0 + 1e-12),
          "dt must not exceed 0.1 / sqrt(L)");
  require(cfg.x0.size() == p.dim(), "x0 has the wrong dimension");
  const Vector v0 = cfg.v0.size() == 0 ? Vector::Zero(p.dim()) : cfg.v0;
  require(v0.size() == p.dim(), "v0 has the wrong dimension");

  OdeTrajectory traj;
  traj.config = cfg;
  traj.config.v0 = v0;
  const auto& geometry = p.geometry();
  const double f_star = geometry ? geometry->f_star : 0.0;
  if (geometry && geometry->mu && p.has_projection()) traj.mu = geometry->mu;

  const double span = cfg.t_end - cfg.t0;
  const auto steps = static_cast<long>(std::ceil(span / cfg.dt - 1e-9));
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  traj.v.reserve(steps + 1);

  const double a = cfg.alpha_c;
  auto accel = [&](const Vector& x, const Vector& v) -> Vector { return -a * v - p.smooth_grad(x); };
  auto push = [&](double t, const Vector& x, const Vector& v) {
    if (!x.allFinite() || !v.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite ODE state at t = " << t;
      throw NumericalFailure(msg.str());
    }
    const double fx = p.smooth_value(x);
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.v.push_back(v);
    traj.f_gap.push_back(fx - f_star);
    traj.mechanical.push_back(fx + 0.5 * v.squaredNorm());
    if (traj.mu) traj.energy.push_back(lyapunov(p, x, v, fx - f_star, *traj.mu));
  };

  Vector x = cfg.x0;
  Vector v = v0;
  push(cfg.t0, x, v);
  traj.m0 = traj.f_gap.front() + 0.5 * v.squaredNorm();
  for (long k = 0; k < steps; ++k) {
    const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
    const double t_next = k + 1 == steps ? cfg.t_end : cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
    const double h = t_next - t;
    const Vector k1x = v;
    const Vector k1v = accel(x, v);
    const Vector x2 = x + 0.5 * h * k1x;
    const Vector v2 = v + 0.5 * h * k1v;
    const Vector k2v = accel(x2, v2);
    const Vector x3 = x + 0.5 * h * v2;
    const Vector v3 = v + 0.5 * h * k2v;
    const Vector k3v = accel(x3, v3);
    const Vector x4 = x + h * v3;
    const Vector v4 = v + h * k3v;
    const Vector k4v = accel(x4, v4);
    x += (h / 6.0) * (k1x + 2.0 * v2 + 2.0 * v3 + v4);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    push(t_next, x, v);
  }
  return traj;
}

CheckReport check_theorem3(const OdeTrajectory& traj, double mu) {
  require(mu > 0.0, "mu must be positive");
  require_friction(traj, theorem3_friction(mu), "thm3");
  CheckReport r;
  r.name = "theorem3_envelope";
  r.slack_used = kOdeSlack;
  const double rate = (2.0 - kSqrt2) * std::sqrt(mu);
  const double gap_coef = 5.5 - 2.0 * kSqrt2;
  const double speed_coef = 4.0 * (1.0 + 1.0 / (kSqrt2 - 1.0));
  const bool with_energy = !traj.energy.empty();
  const double e0 = with_energy ? traj.energy.front() : 0.0;
  const double t0 = traj.config.t0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double decay = std::exp(-rate * (traj.t[k] - t0));
    const double gap_bound = (1.0 + kOdeSlack) * gap_coef * traj.m0 * decay;
    double residual = traj.f_gap[k] - gap_bound;
    if (with_energy) {
      const double speed_bound = (1.0 + kOdeSlack) * speed_coef * e0 * decay;
      residual = std::max(residual, traj.v[k].squaredNorm() - speed_bound);
    }
    r.observe(static_cast<long>(k), residual, 0.0);
  }
  return r;
}

CheckReport check_proposition1(const OdeTrajectory& traj, double mu) {
  require(mu > 0.0, "mu must be positive");
  require_friction(traj, proposition1_friction(mu), "prop1");
  CheckReport r;
  r.name = "proposition1_envelope";
  r.slack_used = kOdeSlack;
  const double rate = std::sqrt(2.0 * mu);
  const double t0 = traj.config.t0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double bound = (1.0 + kOdeSlack) * 39.0 * traj.m0 * std::exp(-rate * (traj.t[k] - t0));
    r.observe(static_cast<long>(k), traj.f_gap[k] - bound, 0.0);
  }
  return r;
}

ContinuousEnergyReport energy_continuous(const CompositeProblem& p, const OdeTrajectory& traj,
                                         double mu) {
  require(p.has_projection(), "continuous energy needs an exact projection onto the solution set");
  require(mu > 0.0, "mu must be positive");
  ContinuousEnergyReport out;
  out.energy.reserve(traj.size());
  std::vector<Vector> stars;
  stars.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    stars.push_back(p.project(traj.x[k]));
    out.energy.push_back(lyapunov(p, traj.x[k], traj.v[k], traj.f_gap[k], mu));
  }

  out.decay.name = "continuous_energy_decay";
  out.decay.slack_used = kOdeSlack;
  const double rate = (2.0 - kSqrt2) * std::sqrt(mu);
  const double e0 = out.energy.empty() ? 0.0 : out.energy.front();
  const double t0 = traj.config.t0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double bound = (1.0 + kOdeSlack) * e0 * std::exp(-rate * (traj.t[k] - t0));
    out.decay.observe(static_cast<long>(k), out.energy[k] - bound, 0.0);
  }

  out.velocity_sign.name = "projection_velocity_sign";
  out.normal_orthogonality.name = "projection_normal_orthogonality";
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double h = traj.t[k + 1] - traj.t[k];
    const Vector dstar = (stars[k + 1] - stars[k]) / h;
    // Rounding in each projection is amplified by 1/h in the difference.
    const double noise = 1e3 * eps *
                         (traj.x[k].norm() + traj.x[k + 1].norm() + stars[k].norm() + stars[k + 1].norm()) / h;
    const Vector u = traj.x[k] - stars[k];
    const double tol_v = noise * traj.v[k].norm() + 1e3 * eps * traj.v[k].norm() * dstar.norm();
    const double tol_u = noise * u.norm() + 1e3 * eps * u.norm() * dstar.norm();
    out.velocity_sign.observe(static_cast<long>(k), -traj.v[k].dot(dstar), tol_v);
    out.normal_orthogonality.observe(static_cast<long>(k), std::abs(u.dot(dstar)), tol_u);
  }
  out.velocity_sign.slack_used = 0.0;
  out.normal_orthogonality.slack_used = 0.0;
  return out;
}

CheckReport check_mechanical_energy(const OdeTrajectory& traj) {
  CheckReport r;
  r.name = "mechanical_energy_monotone";
  if (traj.mechanical.empty()) return r;
  const double scale = std::abs(traj.mechanical.front()) + traj.m0;
  r.slack_used = 1e-8 * scale;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    r.observe(static_cast<long>(k), traj.mechanical[k] - traj.mechanical[k - 1]);
  }
  return r;
}

std::string trajectory_csv(const OdeTrajectory& traj) {
  std::ostringstream out;
  out << "t,fgap,speed,energy\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.t[k]) << ',' << format_double(traj.f_gap[k]) << ','
        << format_double(traj.v[k].norm()) << ',';
    if (!traj.energy.empty()) out << format_double(traj.energy[k]);
    out << '\n';
  }
  return out.str();
}

}  // namespace hbopt

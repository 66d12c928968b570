#include "hbopt/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hbopt {

namespace {

constexpr double kEnergySlack = 1e-10;
constexpr double kBoundSlack = 1e-9;
// Projections go through a pseudo-inverse, so sign tolerances get a little
// headroom over a single rounding.
constexpr double kSignHeadroom = 1e2;

const double kSqrt3 = std::sqrt(3.0);

}  // namespace

void CheckReport::observe(long n, double residual) { observe(n, residual, slack_used); }

void CheckReport::observe(long n, double residual, double tolerance) {
  ++checked;
  if (residual > max_residual || std::isnan(residual)) max_residual = residual;
  if (!(residual <= tolerance)) {
    if (pass) first_violation_n = n;
    pass = false;
  }
}

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json doc;
  doc["name"] = r.name;
  doc["pass"] = r.pass;
  doc["first_violation_n"] = r.first_violation_n ? nlohmann::json(*r.first_violation_n) : nlohmann::json(nullptr);
  doc["max_residual"] = std::isfinite(r.max_residual) ? nlohmann::json(r.max_residual) : nlohmann::json(nullptr);
  doc["slack_used"] = r.slack_used;
  doc["checked"] = r.checked;
  return doc;
}

EnergyTrace energy_base(const CompositeProblem& p, const std::vector<Vector>& iterates) {
  if (!p.has_projection()) {
    throw InvalidArgument("energy checks need an exact projection onto the solution set");
  }
  const GroundTruth& gt = p.ground_truth();
  const double two_over_l = 2.0 / p.lipschitz();
  EnergyTrace et;
  const std::size_t count = iterates.size();
  et.w.reserve(count);
  et.h.reserve(count);
  et.delta.reserve(count);
  et.gamma.reserve(count);
  et.cross_curr.reserve(count);
  et.cross_prev.reserve(count);

  Vector prev_x;
  Vector prev_star;
  double max_x = 0.0;
  double max_star = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const Vector& x = iterates[i];
    const Vector star = gt.project_xstar(x);
    if (i == 0) {
      prev_x = x;
      prev_star = star;
    }
    const Vector dstar = star - prev_star;
    et.w.push_back(two_over_l * (evaluate_total(p, x) - gt.f_star));
    et.h.push_back((x - star).squaredNorm());
    et.delta.push_back((x - prev_x).squaredNorm());
    et.gamma.push_back(dstar.squaredNorm());
    et.cross_curr.push_back((x - star).dot(dstar));
    et.cross_prev.push_back((prev_x - prev_star).dot(dstar));
    max_x = std::max(max_x, x.norm());
    max_star = std::max(max_star, star.norm());
    prev_x = x;
    prev_star = star;
  }
  et.scale = (max_x + max_star) * (max_x + max_star);
  return et;
}

EnergyTrace energy_theorem1(const CompositeProblem& p, const std::vector<Vector>& iterates,
                            double kappa) {
  require(kappa > 0.0, "kappa must be positive");
  EnergyTrace et = energy_base(p, iterates);
  et.kappa = kappa;
  et.lambda = std::sqrt(kappa / 3.0);
  et.alpha = 1.0 - 5.0 / (3.0 * kSqrt3) * std::sqrt(kappa);
  const GroundTruth& gt = p.ground_truth();
  et.e1.reserve(iterates.size());
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const Vector& x = iterates[i];
    const Vector& xp = iterates[i == 0 ? 0 : i - 1];
    const Vector bn = x - xp + et.lambda * (xp - gt.project_xstar(xp));
    et.e1.push_back(et.w[i] + bn.squaredNorm());
  }
  return et;
}

EnergyTrace energy_theorem2(const CompositeProblem& p, const std::vector<Vector>& iterates,
                            double omega, double tau, double kappa) {
  require(kappa > 0.0 && omega > 0.0 && tau > 0.0, "energy parameters must be positive");
  const double rk = std::sqrt(kappa);
  require(omega * rk < 1.0, "omega sqrt(kappa) must be below 1");
  EnergyTrace et = energy_base(p, iterates);
  et.kappa = kappa;
  et.alpha = 1.0 - omega * rk;
  et.lambda = (omega - tau) * rk;
  et.nu = tau * rk;
  const GroundTruth& gt = p.ground_truth();
  const double one_minus_alpha = 1.0 - et.alpha;
  et.e2.reserve(iterates.size());
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const Vector& x = iterates[i];
    const Vector& xp = iterates[i == 0 ? 0 : i - 1];
    const Vector bn = x - xp + et.lambda * (x - gt.project_xstar(x));
    et.e2.push_back(et.w[i] + et.alpha * bn.squaredNorm() +
                    et.lambda * one_minus_alpha * one_minus_alpha * et.h[i]);
  }
  return et;
}

CheckReport check_theorem1_decay(const EnergyTrace& et, double kappa) {
  if (kappa > 1.0 / 3.0) throw InvalidArgument("kappa > 1/3 is outside the thm1 regime");
  require(et.e1.size() == et.w.size(), "trace carries no E1 energy");
  CheckReport r;
  r.name = "theorem1_decay";
  if (et.e1.empty()) return r;
  const Theorem1Params t1 = theorem1_params(kappa);
  const double e0 = et.e1.front();
  r.slack_used = kEnergySlack * e0;
  for (std::size_t n = 0; n + 1 < et.e1.size(); ++n) {
    r.observe(static_cast<long>(n + 1), et.e1[n + 1] - t1.rate * et.e1[n]);
  }
  // Final gap bound on w, with the relative bound slack.
  const double w0 = et.w.front();
  double factor = 1.0;
  for (std::size_t n = 0; n < et.w.size(); ++n) {
    r.observe(static_cast<long>(n), et.w[n] - t1.prefactor * factor * w0, kBoundSlack * w0);
    factor *= t1.rate;
  }
  return r;
}

CheckReport check_theorem2_decay(const EnergyTrace& et) {
  require(et.e2.size() == et.w.size(), "trace carries no E2 energy");
  CheckReport r;
  r.name = "theorem2_decay";
  if (et.e2.empty()) return r;
  const double e0 = et.e2.front();
  r.slack_used = kEnergySlack * e0;
  for (std::size_t n = 0; n + 1 < et.e2.size(); ++n) {
    r.observe(static_cast<long>(n + 1), et.e2[n + 1] - et.e2[n] + et.nu * et.e2[n + 1]);
  }
  const double rho = 1.0 - et.nu + et.nu * et.nu;
  double factor = 1.0;
  for (std::size_t n = 0; n < et.e2.size(); ++n) {
    r.observe(static_cast<long>(n), et.e2[n] - factor * e0);
    factor *= rho;
  }
  return r;
}

CheckReport check_bound_envelope(const std::vector<double>& gaps, double prefactor, double factor,
                                 double rel_slack, const std::string& name) {
  CheckReport r;
  r.name = name;
  if (gaps.empty()) return r;
  const double g0 = gaps.front();
  r.slack_used = rel_slack * std::abs(g0);
  double power = 1.0;
  for (std::size_t n = 0; n < gaps.size(); ++n) {
    r.observe(static_cast<long>(n), gaps[n] - prefactor * power * g0);
    power *= factor;
  }
  return r;
}

Lemma5Residuals check_lemma_tech1(const Vector& xn, const Vector& xprev, const Vector& xsn,
                                  const Vector& xsprev) {
  const double hn = (xn - xsn).squaredNorm();
  const double hprev = (xprev - xsprev).squaredNorm();
  const double delta = (xn - xprev).squaredNorm();
  const Vector dstar = xsn - xsprev;
  const double gamma = dstar.squaredNorm();
  Lemma5Residuals out;
  out.first = (xn - xsn).dot(xn - xprev) -
              (0.5 * (hn - hprev + delta - gamma) + (xprev - xsprev).dot(dstar));
  out.second = (xprev - xsprev).dot(xn - xprev) -
               (0.5 * (hn - hprev - delta + gamma) + (xn - xsn).dot(dstar));
  const double s = xn.norm() + xprev.norm() + xsn.norm() + xsprev.norm();
  out.scale = s * s;
  return out;
}

CheckReport check_lemma_tech2(const EnergyTrace& et, double alpha) {
  CheckReport r;
  r.name = "lemma_descent";
  if (et.size() < 2) return r;
  const double max_delta = *std::max_element(et.delta.begin(), et.delta.end());
  r.slack_used = kEnergySlack * (std::abs(et.w.front()) + et.h.front() + max_delta);
  const double a2 = alpha * alpha;
  for (std::size_t n = 0; n + 1 < et.size(); ++n) {
    const double h_prev = n == 0 ? et.h[0] : et.h[n - 1];
    const double first = et.w[n + 1] - et.w[n] - (a2 * et.delta[n] - et.delta[n + 1]);
    const double rhs = (1.0 + alpha) * et.h[n] + (a2 + alpha) * et.delta[n] - alpha * h_prev -
                       et.h[n + 1] - et.gamma[n + 1] - alpha * et.gamma[n] +
                       2.0 * alpha * et.cross_prev[n] - 2.0 * et.cross_curr[n + 1];
    r.observe(static_cast<long>(n + 1), std::max(first, et.w[n + 1] - rhs));
  }
  return r;
}

CheckReport check_lemma7(const EnergyTrace& et) {
  require(et.e1.size() == et.w.size() && et.kappa > 0.0, "trace carries no E1 energy");
  CheckReport r;
  r.name = "lemma_distance_growth";
  if (et.e1.empty()) return r;
  const double coef = kSqrt3 / std::sqrt(et.kappa);
  r.slack_used = kEnergySlack * coef * std::max(et.e1.front(), et.h.front());
  for (std::size_t n = 1; n < et.size(); ++n) {
    r.observe(static_cast<long>(n), et.h[n] - et.h[n - 1] - coef * (et.e1[n] - et.w[n]));
  }
  return r;
}

CheckReport check_projection_signs(const EnergyTrace& et) {
  CheckReport r;
  r.name = "projection_signs";
  r.slack_used = kSignHeadroom * std::numeric_limits<double>::epsilon() * et.scale;
  for (std::size_t n = 1; n < et.size(); ++n) {
    r.observe(static_cast<long>(n), std::max(-et.cross_curr[n], et.cross_prev[n]));
  }
  return r;
}

CheckReport check_step_envelope_theorem1(const EnergyTrace& et) {
  require(et.e1.size() == et.w.size() && et.kappa > 0.0, "trace carries no E1 energy");
  CheckReport r;
  r.name = "theorem1_step_envelope";
  if (et.e1.empty()) return r;
  const double rho = theorem1_params(et.kappa).rate;
  const double coef = 2.0 * rho + 2.0 / (et.lambda * et.lambda * et.kappa);
  const double e0 = et.e1.front();
  r.slack_used = kEnergySlack * coef * e0;
  double power = 1.0;
  for (std::size_t n = 1; n < et.size(); ++n) {
    r.observe(static_cast<long>(n), et.delta[n] - coef * power * e0);
    power *= rho;
  }
  return r;
}

CheckReport check_step_envelope_theorem2(const EnergyTrace& et) {
  require(et.e2.size() == et.w.size() && et.lambda > 0.0, "trace carries no E2 energy");
  CheckReport r;
  r.name = "theorem2_step_envelope";
  if (et.e2.empty()) return r;
  const double rho = 1.0 - et.nu + et.nu * et.nu;
  const double coef = 2.0 / et.alpha + 2.0 / (et.lambda * et.lambda * et.kappa);
  const double e0 = et.e2.front();
  r.slack_used = kEnergySlack * coef * e0;
  double power = 1.0;
  for (std::size_t n = 0; n < et.size(); ++n) {
    r.observe(static_cast<long>(n), et.delta[n] - coef * power * e0);
    power *= rho;
  }
  return r;
}

EnvelopeSummary step_norm_envelope(const std::vector<double>& step_norms, double exponent,
                                   double growth) {
  EnvelopeSummary s;
  const std::size_t half = step_norms.size() / 2;
  for (std::size_t n = 0; n < step_norms.size(); ++n) {
    const double v = step_norms[n] * std::exp(exponent * static_cast<double>(n));
    s.sup = std::max(s.sup, v);
    if (n < half) s.sup_first_half = s.sup;
  }
  s.bounded = std::isfinite(s.sup) && s.sup <= growth * s.sup_first_half;
  return s;
}

std::optional<double> RateFit::decrement() const {
  if (!slope) return std::nullopt;
  return -*slope;
}

RateFit fit_tail_rate(const std::vector<double>& gaps, double f_x0_abs) {
  require(gaps.size() >= 50, "rate fitting needs at least 50 records");
  const double floor = 1e2 * std::numeric_limits<double>::epsilon() * std::abs(f_x0_abs);
  std::vector<std::size_t> above;
  for (std::size_t n = 0; n < gaps.size(); ++n) {
    if (std::isfinite(gaps[n]) && gaps[n] > floor && gaps[n] > 0.0) above.push_back(n);
  }
  RateFit fit;
  if (above.empty()) {
    fit.floor_hit = true;
    return fit;
  }
  const std::size_t keep = (above.size() * 3 + 4) / 5;
  const std::size_t first = above.size() - keep;
  fit.n_lo = static_cast<long>(above[first]);
  fit.n_hi = static_cast<long>(above.back());
  if (fit.n_hi <= fit.n_lo + 20) {
    fit.floor_hit = true;
    return fit;
  }

  double sx = 0.0, sy = 0.0;
  const double m = static_cast<double>(keep);
  for (std::size_t i = first; i < above.size(); ++i) {
    sx += static_cast<double>(above[i]);
    sy += std::log(gaps[above[i]]);
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = first; i < above.size(); ++i) {
    const double dx = static_cast<double>(above[i]) - mx;
    const double dy = std::log(gaps[above[i]]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (fit.r_squared >= 0.99) fit.slope = slope;
  return fit;
}

nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json doc;
  doc["window"] = {fit.n_lo, fit.n_hi};
  doc["slope"] = fit.slope ? nlohmann::json(*fit.slope) : nlohmann::json(nullptr);
  doc["r_squared"] = fit.r_squared;
  doc["floor_hit"] = fit.floor_hit;
  return doc;
}

}  // namespace hbopt

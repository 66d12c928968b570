#include "hbopt/tuning.hpp"

#include "hbopt/common.hpp"

#include <algorithm>
#include <cmath>

namespace hbopt {

namespace {

constexpr int kScanPanels = 10000;
constexpr double kBisectionWidth = 1e-12;
constexpr double kOmegaTolerance = 1e-6;

const double kSqrt3 = std::sqrt(3.0);

void fill_derived(RateCertificate& c) {
  const double rk = std::sqrt(c.kappa);
  c.alpha = 1.0 - c.omega * rk;
  c.sigma = c.tau - c.tau * c.tau * rk;
  const double gap = c.omega - c.tau;
  c.prefactor_C = 1.0 + gap * gap + gap * c.omega * c.tau * rk;
  c.per_iter_factor = 1.0 - c.tau * rk + c.tau * c.tau * c.kappa;
}

}  // namespace

CubicPoly CubicPoly::make(double omega, double kappa) {
  const double w = omega * std::sqrt(kappa);
  return {1.0 - w, -omega * (2.0 - w), omega * omega + 2.0, -omega};
}

double cubic_p(double tau, double omega, double kappa) { return CubicPoly::make(omega, kappa)(tau); }

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kTheorem1: return "THEOREM1";
    case Regime::kCorollary1Optimal: return "COROLLARY1_OPTIMAL";
    case Regime::kCorollary2Overestimated: return "COROLLARY2_OVERESTIMATED";
  }
  return "COROLLARY1_OPTIMAL";
}

Regime regime_from_string(const std::string& name) {
  if (name == "thm1" || name == "THEOREM1") return Regime::kTheorem1;
  if (name == "cor1" || name == "COROLLARY1_OPTIMAL") return Regime::kCorollary1Optimal;
  if (name == "cor2" || name == "COROLLARY2_OVERESTIMATED") return Regime::kCorollary2Overestimated;
  throw InvalidArgument("unknown regime '" + name + "'");
}

double RateCertificate::certified_decrement() const { return -std::log(per_iter_factor); }

Theorem1Params theorem1_params(double kappa) {
  require(kappa > 0.0 && kappa <= 1.0 / 3.0,
          "the thm1 regime needs 0 < kappa <= 1/3; use the cor1 regime instead");
  const double rk = std::sqrt(kappa);
  return {1.0 - 5.0 / (3.0 * kSqrt3) * rk, 1.0 - 2.0 / (3.0 * kSqrt3) * rk, 4.0 / 3.0};
}

RateCertificate theorem1_certificate(double kappa) {
  const Theorem1Params t1 = theorem1_params(kappa);
  RateCertificate c;
  c.kappa = kappa;
  c.regime = Regime::kTheorem1;
  c.omega = 5.0 / (3.0 * kSqrt3);
  c.tau = 2.0 / (3.0 * kSqrt3);
  c.sigma = c.tau;
  c.alpha = t1.alpha;
  c.prefactor_C = t1.prefactor;
  c.per_iter_factor = t1.rate;
  return c;
}

std::optional<double> solve_max_tau(double omega, double kappa) {
  require(omega > 0.0 && kappa >= 0.0, "solve_max_tau needs omega > 0 and kappa >= 0");
  require(omega * std::sqrt(kappa) < 1.0, "solve_max_tau needs omega sqrt(kappa) < 1");
  const CubicPoly p = CubicPoly::make(omega, kappa);
  const double hi_end = omega / 2.0;
  const double width = hi_end / kScanPanels;
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= kScanPanels; ++k) {
    const double t = k == kScanPanels ? hi_end : k * width;
    if (p(t) > 0.0) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) return std::nullopt;
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (p(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

RateCertificate certificate_at(double omega, double kappa, Regime regime) {
  const auto tau = solve_max_tau(omega, kappa);
  if (!tau) throw NumericalFailure("no admissible tau for this omega");
  RateCertificate c;
  c.kappa = kappa;
  c.omega = omega;
  c.tau = *tau;
  c.regime = regime;
  fill_derived(c);
  return c;
}

RateCertificate corollary1_certificate(double kappa) {
  require(kappa > 0.0 && kappa <= 1.0, "the cor1 regime needs 0 < kappa <= 1");
  const double rk = std::sqrt(kappa);
  double a = 1e-9;
  double b = std::min(3.0, (1.0 - 1e-12) / rk);
  auto tau_of = [&](double w) { return solve_max_tau(w, kappa).value_or(0.0); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tau_of(c);
  double fd = tau_of(d);
  while (b - a > kOmegaTolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = tau_of(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = tau_of(d);
    }
  }
  return certificate_at(0.5 * (a + b), kappa, Regime::kCorollary1Optimal);
}

RateCertificate corollary2_certificate(double theta, double kappa) {
  require(kappa > 0.0 && kappa <= 0.1, "the cor2 regime needs 0 < kappa <= 1/10");
  const double rk = std::sqrt(kappa);
  require(theta >= 1.5 * rk * (1.0 - 1e-12) && theta < 1.0,
          "the cor2 regime needs theta in [3/2 sqrt(kappa), 1)");
  RateCertificate c;
  c.kappa = kappa;
  c.regime = Regime::kCorollary2Overestimated;
  c.theta = theta;
  c.omega = std::max(theta / rk, 1.5);
  c.tau = 2.0 / (3.0 * c.omega);
  if (!(lemma8_phi(c.omega, kappa) < 0.0)) {
    throw NumericalFailure("Phi < 0 failed for this (theta, kappa)");
  }
  fill_derived(c);
  const double lead = 2.0 / (3.0 * theta);
  c.cor2_tau = lead * (1.0 - lead * rk);
  c.cor2_exponent = *c.cor2_tau * kappa;
  return c;
}

double lemma8_phi(double omega, double kappa) {
  require(omega > 0.0 && kappa >= 0.0 && kappa < 1.0, "lemma8_phi needs omega > 0, kappa in [0, 1)");
  const double rk = std::sqrt(kappa);
  const double w2 = omega * omega;
  const double w3 = w2 * omega;
  const double phi = -9.0 * w2 * w2 + 12.0 * w3 * rk + 12.0 * w2 - 8.0 * omega * rk + 8.0;
  if (omega * rk < 1.0) {
    const double lhs = phi / (27.0 * w3);
    const double rhs = cubic_p(2.0 / (3.0 * omega), omega, kappa);
    const double scale = std::max({1.0, std::abs(lhs), 9.0 * w2 * w2 / (27.0 * w3)});
    if (std::abs(lhs - rhs) > 1e-12 * scale) {
      throw NumericalFailure("Phi / (27 omega^3) does not match P(2/(3 omega))");
    }
  }
  return phi;
}

long iterations_to_accuracy(const RateCertificate& cert, double eps) {
  require(eps > 0.0, "accuracy must be positive");
  require(cert.per_iter_factor > 0.0 && cert.per_iter_factor < 1.0, "certificate has no contraction");
  if (cert.prefactor_C <= eps) return 0;
  return static_cast<long>(std::ceil(std::log(cert.prefactor_C / eps) / cert.certified_decrement()));
}

}  // namespace hbopt

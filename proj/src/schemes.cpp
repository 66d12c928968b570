#include "hbopt/schemes.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hbopt {

namespace {

void ensure_finite(const Vector& v, const char* what, long n) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at iteration " << n;
    throw NumericalFailure(msg.str());
  }
}

// prox_{sh}(point - s grad f(point)) with finiteness checks.
Vector forward_backward(const CompositeProblem& p, const Vector& point, double s, long n) {
  const Vector g = p.smooth_grad(point);
  ensure_finite(g, "gradient", n);
  Vector out = p.prox(point - s * g, s);
  ensure_finite(out, "prox output", n);
  return out;
}

IterateState advance(IterateState st, Vector x_next, double momentum) {
  IterateState out;
  out.n = st.n + 1;
  out.y_curr = x_next + momentum * (x_next - st.x_curr);
  out.x_prev = std::move(st.x_curr);
  out.x_curr = std::move(x_next);
  out.t_curr = st.t_curr;
  return out;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kFB: return "FB";
    case SchemeKind::kFistaBT: return "FISTA_BT";
    case SchemeKind::kFistaCD: return "FISTA_CD";
    case SchemeKind::kVFista: return "VFISTA";
    case SchemeKind::kFistaRestart: return "FISTA_RESTART";
  }
  return "FB";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  if (name == "FB") return SchemeKind::kFB;
  if (name == "FISTA_BT") return SchemeKind::kFistaBT;
  if (name == "FISTA_CD") return SchemeKind::kFistaCD;
  if (name == "VFISTA") return SchemeKind::kVFista;
  if (name == "FISTA_RESTART") return SchemeKind::kFistaRestart;
  throw InvalidArgument("unknown scheme '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIter: return "max_iter";
    case StopReason::kGapReached: return "gap_reached";
    case StopReason::kResidualReached: return "residual_reached";
  }
  return "max_iter";
}

void validate_config(const SchemeConfig& cfg, const CompositeProblem& p) {
  const double lip = p.lipschitz();
  const double s = cfg.step.value_or(1.0 / lip);
  require(s > 0.0 && std::isfinite(s), "step size must be positive");
  require(cfg.max_iter >= 0, "max_iter must be nonnegative");
  require(cfg.stop_gap >= 0.0 && cfg.stop_residual >= 0.0, "stop tolerances must be nonnegative");
  switch (cfg.kind) {
    case SchemeKind::kFB:
      require(s < 2.0 / lip, "forward-backward needs s in (0, 2/L)");
      break;
    case SchemeKind::kVFista:
      require(cfg.alpha >= 0.0 && cfg.alpha < 1.0, "V-FISTA momentum must lie in [0, 1)");
      break;
    case SchemeKind::kFistaCD:
      require(cfg.cd_alpha >= 3.0, "Chambolle-Dossal parameter must be >= 3");
      break;
    case SchemeKind::kFistaRestart:
      if (cfg.restart_period) {
        require(*cfg.restart_period >= 1, "restart period must be >= 1");
      } else {
        require(p.geometry() && p.geometry()->mu,
                "default restart period needs the growth modulus mu");
      }
      break;
    case SchemeKind::kFistaBT:
      break;
  }
}

IterateState IterateState::initial(const Vector& x0) {
  IterateState st;
  st.n = 0;
  st.x_curr = x0;
  st.x_prev = x0;
  st.y_curr = x0;
  st.t_curr = 1.0;
  return st;
}

IterateState step_vfista(const CompositeProblem& p, const IterateState& st, double alpha, double s) {
  return advance(st, forward_backward(p, st.y_curr, s, st.n), alpha);
}

IterateState step_fb(const CompositeProblem& p, const IterateState& st, double s) {
  return advance(st, forward_backward(p, st.x_curr, s, st.n), 0.0);
}

IterateState step_fista_bt(const CompositeProblem& p, const IterateState& st, double s) {
  const double t_next = fista_next_t(st.t_curr);
  const double momentum = (st.t_curr - 1.0) / t_next;
  IterateState out = advance(st, forward_backward(p, st.y_curr, s, st.n), momentum);
  out.t_curr = t_next;
  return out;
}

IterateState step_fista_cd(const CompositeProblem& p, const IterateState& st, double s,
                           double cd_alpha) {
  return advance(st, forward_backward(p, st.y_curr, s, st.n), cd_momentum(st.n + 1, cd_alpha));
}

double fista_next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

double cd_momentum(long n, double cd_alpha) {
  require(n >= 1, "Chambolle-Dossal momentum is defined for n >= 1");
  return static_cast<double>(n - 1) / (static_cast<double>(n) + cd_alpha - 1.0);
}

long default_restart_period(double lipschitz, double mu) {
  require(lipschitz > 0.0 && mu > 0.0, "restart period needs positive L and mu");
  const double period = std::floor(2.0 * std::numbers::e * std::sqrt(lipschitz / mu));
  return std::max(1L, static_cast<long>(period));
}

Vector gradient_mapping(const CompositeProblem& p, const Vector& x, double s) {
  return (x - p.prox(x - s * p.smooth_grad(x), s)) / s;
}

bool RunResult::reached_target() const {
  const bool wanted = config.stop_gap > 0.0 || config.stop_residual > 0.0;
  return !wanted || stop_reason != StopReason::kMaxIter;
}

std::vector<double> RunResult::gaps() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.f_gap);
  return out;
}

RunResult run(const CompositeProblem& p, const SchemeConfig& cfg, const Vector& x0) {
  require(x0.size() == p.dim(), "initial point has the wrong dimension");
  validate_config(cfg, p);
  ensure_finite(x0, "initial point", 0);

  RunResult result;
  result.config = cfg;
  result.step = cfg.step.value_or(1.0 / p.lipschitz());
  const double s = result.step;
  const auto& geometry = p.geometry();
  const bool has_fstar = geometry.has_value();
  const bool has_proj = p.has_projection();

  long period = 0;
  if (cfg.kind == SchemeKind::kFistaRestart) {
    period = cfg.restart_period ? *cfg.restart_period
                                : default_restart_period(p.lipschitz(), *geometry->mu);
    result.config.restart_period = period;
  }

  const auto start = std::chrono::steady_clock::now();
  auto record = [&](const IterateState& st, const Vector& previous) {
    TraceRecord rec;
    rec.n = st.n;
    rec.f_gap = has_fstar ? evaluate_total(p, st.x_curr) - geometry->f_star
                          : std::numeric_limits<double>::quiet_NaN();
    rec.step_norm = (st.x_curr - previous).norm();
    if (has_proj) rec.dist_opt = (st.x_curr - geometry->project_xstar(st.x_curr)).norm();
    if (cfg.record_wall_time) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    }
    result.records.push_back(rec);
    if (cfg.keep_iterates) result.iterates.push_back(st.x_curr);
    return rec;
  };
  auto should_stop = [&](const IterateState& st, const TraceRecord& rec) {
    if (cfg.stop_gap > 0.0 && has_fstar && rec.f_gap <= cfg.stop_gap) {
      result.stop_reason = StopReason::kGapReached;
      return true;
    }
    if (cfg.stop_residual > 0.0 && gradient_mapping(p, st.x_curr, s).norm() <= cfg.stop_residual) {
      result.stop_reason = StopReason::kResidualReached;
      return true;
    }
    return false;
  };

  result.records.reserve(static_cast<std::size_t>(std::min(cfg.max_iter, 1'000'000L)) + 1);
  IterateState st = IterateState::initial(x0);
  const TraceRecord first = record(st, st.x_curr);
  bool done = should_stop(st, first);
  while (!done && st.n < cfg.max_iter) {
    const Vector previous = st.x_curr;
    switch (cfg.kind) {
      case SchemeKind::kFB: st = step_fb(p, st, s); break;
      case SchemeKind::kVFista: st = step_vfista(p, st, cfg.alpha, s); break;
      case SchemeKind::kFistaBT: st = step_fista_bt(p, st, s); break;
      case SchemeKind::kFistaCD: st = step_fista_cd(p, st, s, cfg.cd_alpha); break;
      case SchemeKind::kFistaRestart:
        st = step_fista_bt(p, st, s);
        if (st.n % period == 0) {
          st.t_curr = 1.0;
          st.x_prev = st.x_curr;
          st.y_curr = st.x_curr;
        }
        break;
    }
    const TraceRecord rec = record(st, previous);
    if (!std::isfinite(rec.f_gap) && has_fstar) {
      throw NumericalFailure("non-finite objective at iteration " + std::to_string(st.n));
    }
    done = should_stop(st, rec);
  }
  result.final_state = std::move(st);
  return result;
}

RunResult run_restart_fista(const CompositeProblem& p, SchemeConfig cfg, const Vector& x0) {
  cfg.kind = SchemeKind::kFistaRestart;
  return run(p, cfg, x0);
}

}  // namespace hbopt

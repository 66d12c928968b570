#pragma once

#include "hbopt/problems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hbopt {

enum class SchemeKind { kFB, kFistaBT, kFistaCD, kVFista, kFistaRestart };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kFB;
  /// Step size s; 1/L when unset.
  std::optional<double> step;
  /// Constant momentum of V-FISTA, in [0, 1).
  double alpha = 0.0;
  /// Chambolle-Dossal parameter, >= 3.
  double cd_alpha = 3.0;
  /// Restart period; floor(2e sqrt(L/mu)) when unset.
  std::optional<long> restart_period;
  long max_iter = 1000;
  /// Stop once F(x_n) - F* <= stop_gap (ignored when 0 or F* unknown).
  double stop_gap = 0.0;
  /// Stop once the gradient-mapping norm <= stop_residual (ignored when 0).
  double stop_residual = 0.0;
  /// Keep x_0..x_N in the result (needed by the Lyapunov checkers).
  bool keep_iterates = false;
  /// Fill TraceRecord::wall_ns; off by default so traces stay byte-reproducible.
  bool record_wall_time = false;
};

/// Throws InvalidArgument when `cfg` is inconsistent with `p`.
void validate_config(const SchemeConfig& cfg, const CompositeProblem& p);

/// Rolling iterate pair. At n = 0, x_prev = x_curr = y_curr.
struct IterateState {
  long n = 0;
  Vector x_curr;
  Vector x_prev;
  Vector y_curr;
  /// FISTA (Beck-Teboulle) sequence t_n; t_0 = 1.
  double t_curr = 1.0;

  static IterateState initial(const Vector& x0);
};

/// x+ = prox_{sh}(y - s grad f(y)), y+ = x+ + alpha (x+ - x).
IterateState step_vfista(const CompositeProblem& p, const IterateState& st, double alpha, double s);
/// x+ = prox_{sh}(x - s grad f(x)).
IterateState step_fb(const CompositeProblem& p, const IterateState& st, double s);
/// Beck-Teboulle FISTA: t+ = (1 + sqrt(1 + 4t^2)) / 2, momentum (t - 1) / t+.
IterateState step_fista_bt(const CompositeProblem& p, const IterateState& st, double s);
/// Chambolle-Dossal FISTA: momentum (n - 1) / (n + a - 1).
IterateState step_fista_cd(const CompositeProblem& p, const IterateState& st, double s,
                           double cd_alpha);

double fista_next_t(double t);
double cd_momentum(long n, double cd_alpha);
/// floor(2e sqrt(L / mu)).
long default_restart_period(double lipschitz, double mu);

/// (x - prox_{sh}(x - s grad f(x))) / s.
Vector gradient_mapping(const CompositeProblem& p, const Vector& x, double s);

struct TraceRecord {
  long n = 0;
  /// F(x_n) - F*; NaN when F* is unknown.
  double f_gap = 0.0;
  /// ||x_n - x_{n-1}||.
  double step_norm = 0.0;
  std::optional<double> dist_opt;
  std::int64_t wall_ns = 0;
};

enum class StopReason { kMaxIter, kGapReached, kResidualReached };
std::string to_string(StopReason reason);

struct RunResult {
  SchemeConfig config;
  double step = 0.0;
  std::vector<TraceRecord> records;
  /// x_0..x_N, filled when config.keep_iterates.
  std::vector<Vector> iterates;
  StopReason stop_reason = StopReason::kMaxIter;
  IterateState final_state;

  /// False when a stop criterion was requested but max_iter came first.
  bool reached_target() const;
  std::vector<double> gaps() const;
};

/// Runs the configured scheme from x0. The trace has one record per
/// iteration including n = 0.
RunResult run(const CompositeProblem& p, const SchemeConfig& cfg, const Vector& x0);

/// Periodically restarted FISTA: t <- 1 and x_prev <- x_curr every period.
RunResult run_restart_fista(const CompositeProblem& p, SchemeConfig cfg, const Vector& x0);

}  // namespace hbopt

#pragma once

#include "hbopt/common.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hbopt {

/// Smooth part f of F = f + h.
struct SmoothTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

/// Nonsmooth part h of F = f + h. `prox(x, s)` returns prox_{s h}(x).
struct NonsmoothTerm {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&, double)> prox;
};

NonsmoothTerm zero_regularizer();
NonsmoothTerm l1_regularizer(double lambda);
/// Indicator of the nonnegative orthant; value is +inf outside.
NonsmoothTerm nonnegative_indicator();

/// Coordinatewise sign(x) * max(|x| - threshold, 0).
Vector soft_threshold(const Vector& x, double threshold);

/// Known geometry of the minimizer set X* = argmin F.
struct GroundTruth {
  double f_star = 0.0;
  /// Quadratic growth modulus; absent when the caller did not supply one.
  std::optional<double> mu;
  std::optional<double> kappa;
  /// True when f_star came from a numerical reference solve.
  bool numeric_reference = false;
  /// Certified upper bound on F(x_ref) - F* of the reference solve (0 if analytic).
  double f_star_error_bound = 0.0;
  /// Euclidean projection onto X*; empty when X* has no closed form.
  std::function<Vector(const Vector&)> project_xstar;

  bool has_projection() const { return static_cast<bool>(project_xstar); }
  std::optional<double> dist_xstar(const Vector& x) const;
};

enum class ProblemKind { kLeastSquares, kDegenerateLeastSquares, kLasso, kCustom };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// Everything needed to rebuild a problem bit-for-bit.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::kCustom;
  int rows = 0;
  int cols = 0;
  int rank = 0;
  std::uint64_t seed = 0;
  std::vector<double> singular_values;
  Matrix matrix;
  Vector rhs;
  double lambda = 0.0;
};

/// F = f + h with first-order and proximal oracles. Immutable once built;
/// all oracles are const and safe to share across threads.
class CompositeProblem {
 public:
  CompositeProblem(int dim, SmoothTerm smooth, double lipschitz, NonsmoothTerm nonsmooth,
                   std::optional<GroundTruth> geometry = std::nullopt,
                   ProblemSpec spec = {});

  int dim() const { return dim_; }
  double lipschitz() const { return lipschitz_; }

  double smooth_value(const Vector& x) const { return smooth_.value(x); }
  Vector smooth_grad(const Vector& x) const { return smooth_.grad(x); }
  double nonsmooth_value(const Vector& x) const { return nonsmooth_.value(x); }
  Vector prox(const Vector& x, double step) const;
  const std::string& nonsmooth_name() const { return nonsmooth_.name; }

  const std::optional<GroundTruth>& geometry() const { return geometry_; }
  const GroundTruth& ground_truth() const;
  bool has_projection() const { return geometry_ && geometry_->has_projection(); }
  Vector project(const Vector& x) const;

  const ProblemSpec& spec() const { return spec_; }

 private:
  int dim_;
  SmoothTerm smooth_;
  double lipschitz_;
  NonsmoothTerm nonsmooth_;
  std::optional<GroundTruth> geometry_;
  ProblemSpec spec_;
};

/// f(x) + h(x); +inf when x leaves the domain of h.
double evaluate_total(const CompositeProblem& p, const Vector& x);

// Problem generators --------------------------------------------------------

/// Singular values below this fraction of sigma_max are treated as zero.
inline constexpr double kRankCutoff = 1e-10;
/// Smallest admissible sigma_min,nonzero / sigma_max.
inline constexpr double kConditioningFloor = 1e-8;

/// Evenly spaced singular values from 1 down to 0.1 (a single 1 for rank 1).
std::vector<double> default_profile(int rank);
/// Geometric singular values from 1 down to sqrt(kappa), so that mu/L = kappa.
std::vector<double> geometric_profile(int rank, double kappa);

/// F(x) = 1/2 ||Ax - b||^2, h = 0. X* = A^+ b + ker(A) with exact projection
/// x - A^+(Ax - b); L and mu from a rank-revealing SVD.
CompositeProblem make_least_squares(const Matrix& a, const Vector& b);

/// Seeded A = U diag(sigma) V^T with orthonormal U (m x rank), V (n x rank) and
/// b = A z, so F* = 0. An empty profile selects `default_profile(rank)`.
CompositeProblem make_degenerate_least_squares(int m, int n, int rank, std::uint64_t seed,
                                               std::span<const double> singular_values = {});

/// LASSO 1/2 ||Ax - y||^2 + lambda ||x||_1. F* is computed by a forward-backward
/// reference solve and flagged as numeric. `mu` is optional and user supplied.
CompositeProblem make_lasso(const Matrix& a, const Vector& y, double lambda,
                            std::optional<double> mu = std::nullopt,
                            std::optional<double> known_f_star = std::nullopt);

/// Deterministic standard normal stream (mt19937_64 + Box-Muller).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);
  double next();
  Vector vector(int n);
  Matrix matrix(int rows, int cols);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
  double uniform_open();
};

}  // namespace hbopt

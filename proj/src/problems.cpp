#include "hbopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hbopt {

namespace {

struct LeastSquaresGeometry {
  Matrix pinv;
  double sigma_max = 0.0;
  double sigma_min_nonzero = 0.0;
  int rank = 0;
};

// Rank-revealing SVD, computed once per problem. Singular values below
// kRankCutoff * sigma_max are dropped from the pseudoinverse.
LeastSquaresGeometry analyze_matrix(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  LeastSquaresGeometry g;
  g.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  require(g.sigma_max > 0.0, "matrix must be nonzero");
  const double cutoff = kRankCutoff * g.sigma_max;
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      inv(i) = 1.0 / sv(i);
      g.sigma_min_nonzero = sv(i);
      ++g.rank;
    }
  }
  if (g.sigma_min_nonzero < kConditioningFloor * g.sigma_max) {
    std::ostringstream msg;
    msg << "smallest nonzero singular value " << g.sigma_min_nonzero
        << " is below the conditioning floor " << kConditioningFloor << " * sigma_max";
    throw InvalidArgument(msg.str());
  }
  g.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return g;
}

SmoothTerm least_squares_term(std::shared_ptr<const Matrix> a, std::shared_ptr<const Vector> b) {
  SmoothTerm f;
  f.value = [a, b](const Vector& x) { return 0.5 * (*a * x - *b).squaredNorm(); };
  f.grad = [a, b](const Vector& x) -> Vector { return a->transpose() * (*a * x - *b); };
  return f;
}

GroundTruth least_squares_truth(const LeastSquaresGeometry& g, std::shared_ptr<const Matrix> a,
                                std::shared_ptr<const Vector> b, double f_star) {
  GroundTruth gt;
  gt.f_star = f_star;
  gt.mu = g.sigma_min_nonzero * g.sigma_min_nonzero;
  gt.kappa = *gt.mu / (g.sigma_max * g.sigma_max);
  auto pinv = std::make_shared<const Matrix>(g.pinv);
  gt.project_xstar = [a, b, pinv](const Vector& x) -> Vector { return x - *pinv * (*a * x - *b); };
  return gt;
}

}  // namespace

NonsmoothTerm zero_regularizer() {
  return {"zero", [](const Vector&) { return 0.0; }, [](const Vector& x, double) { return x; }};
}

NonsmoothTerm l1_regularizer(double lambda) {
  require(lambda > 0.0, "l1 weight must be positive");
  return {"l1", [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); },
          [lambda](const Vector& x, double s) { return soft_threshold(x, s * lambda); }};
}

NonsmoothTerm nonnegative_indicator() {
  return {"nonnegative_indicator",
          [](const Vector& x) {
            return (x.array() < 0.0).any() ? std::numeric_limits<double>::infinity() : 0.0;
          },
          [](const Vector& x, double) -> Vector { return x.cwiseMax(0.0); }};
}

Vector soft_threshold(const Vector& x, double threshold) {
  return x.unaryExpr([threshold](double v) {
    const double mag = std::abs(v) - threshold;
    return mag > 0.0 ? std::copysign(mag, v) : 0.0;
  });
}

std::optional<double> GroundTruth::dist_xstar(const Vector& x) const {
  if (!project_xstar) return std::nullopt;
  return (x - project_xstar(x)).norm();
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kLeastSquares: return "least_squares";
    case ProblemKind::kDegenerateLeastSquares: return "degenerate_least_squares";
    case ProblemKind::kLasso: return "lasso";
    case ProblemKind::kCustom: return "custom";
  }
  return "custom";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "least_squares") return ProblemKind::kLeastSquares;
  if (name == "degenerate_least_squares") return ProblemKind::kDegenerateLeastSquares;
  if (name == "lasso") return ProblemKind::kLasso;
  throw InvalidArgument("unknown problem kind '" + name + "'");
}

CompositeProblem::CompositeProblem(int dim, SmoothTerm smooth, double lipschitz,
                                   NonsmoothTerm nonsmooth, std::optional<GroundTruth> geometry,
                                   ProblemSpec spec)
    : dim_(dim),
      smooth_(std::move(smooth)),
      lipschitz_(lipschitz),
      nonsmooth_(std::move(nonsmooth)),
      geometry_(std::move(geometry)),
      spec_(std::move(spec)) {
  require(dim_ > 0, "problem dimension must be positive");
  require(lipschitz_ > 0.0 && std::isfinite(lipschitz_), "Lipschitz constant must be positive");
  require(smooth_.value && smooth_.grad, "smooth term needs value and gradient oracles");
  require(nonsmooth_.value && nonsmooth_.prox, "nonsmooth term needs value and prox oracles");
  if (geometry_ && geometry_->mu) {
    require(*geometry_->mu > 0.0, "quadratic growth modulus must be positive");
    if (!geometry_->kappa) geometry_->kappa = *geometry_->mu / lipschitz_;
  }
}

Vector CompositeProblem::prox(const Vector& x, double step) const {
  if (step == 0.0) return x;
  return nonsmooth_.prox(x, step);
}

const GroundTruth& CompositeProblem::ground_truth() const {
  if (!geometry_) throw InvalidArgument("problem has no ground-truth geometry");
  return *geometry_;
}

Vector CompositeProblem::project(const Vector& x) const {
  if (!has_projection()) throw InvalidArgument("problem exposes no projection onto X*");
  return geometry_->project_xstar(x);
}

double evaluate_total(const CompositeProblem& p, const Vector& x) {
  require(x.size() == p.dim(), "dimension mismatch in evaluate_total");
  const double h = p.nonsmooth_value(x);
  if (std::isinf(h)) return h;
  return p.smooth_value(x) + h;
}

std::vector<double> default_profile(int rank) {
  require(rank >= 1, "rank must be at least 1");
  if (rank == 1) return {1.0};
  std::vector<double> out(rank);
  for (int i = 0; i < rank; ++i) out[i] = 1.0 - 0.9 * static_cast<double>(i) / (rank - 1);
  return out;
}

std::vector<double> geometric_profile(int rank, double kappa) {
  require(rank >= 1, "rank must be at least 1");
  require(kappa > 0.0 && kappa <= 1.0, "kappa must lie in (0, 1]");
  if (rank == 1) return {1.0};
  std::vector<double> out(rank);
  const double last = std::sqrt(kappa);
  for (int i = 0; i < rank; ++i) {
    out[i] = std::pow(last, static_cast<double>(i) / (rank - 1));
  }
  out.back() = last;
  return out;
}

CompositeProblem make_least_squares(const Matrix& a, const Vector& b) {
  require(a.rows() == b.size(), "least squares: rows of A must match size of b");
  require(a.cols() > 0 && a.rows() > 0, "least squares: empty matrix");
  const LeastSquaresGeometry g = analyze_matrix(a);
  auto ap = std::make_shared<const Matrix>(a);
  auto bp = std::make_shared<const Vector>(b);
  const Vector residual = a * (g.pinv * b) - b;
  const double f_star = 0.5 * residual.squaredNorm();
  ProblemSpec spec;
  spec.kind = ProblemKind::kLeastSquares;
  spec.rows = static_cast<int>(a.rows());
  spec.cols = static_cast<int>(a.cols());
  spec.rank = g.rank;
  spec.matrix = a;
  spec.rhs = b;
  return CompositeProblem(static_cast<int>(a.cols()), least_squares_term(ap, bp),
                          g.sigma_max * g.sigma_max, zero_regularizer(),
                          least_squares_truth(g, ap, bp, f_star), std::move(spec));
}

CompositeProblem make_degenerate_least_squares(int m, int n, int rank, std::uint64_t seed,
                                               std::span<const double> singular_values) {
  require(m >= 1 && n >= 1, "dimensions must be positive");
  require(rank >= 1 && rank <= std::min(m, n), "rank must satisfy 1 <= rank <= min(m, n)");
  std::vector<double> profile(singular_values.begin(), singular_values.end());
  if (profile.empty()) profile = default_profile(rank);
  require(static_cast<int>(profile.size()) == rank, "singular value profile must have `rank` entries");
  for (double s : profile) require(s > 0.0 && std::isfinite(s), "singular values must be positive");
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  if (*lo < kConditioningFloor * *hi) {
    throw InvalidArgument("singular value profile falls below the conditioning floor");
  }

  GaussianStream rng(seed);
  const Matrix left = Eigen::HouseholderQR<Matrix>(rng.matrix(m, rank)).householderQ() *
                      Matrix::Identity(m, rank);
  const Matrix right = Eigen::HouseholderQR<Matrix>(rng.matrix(n, rank)).householderQ() *
                       Matrix::Identity(n, rank);
  const Vector sigma = Eigen::Map<const Vector>(profile.data(), rank);
  const Matrix a = left * sigma.asDiagonal() * right.transpose();
  const Vector b = a * rng.vector(n);

  const LeastSquaresGeometry g = analyze_matrix(a);
  if (g.rank != rank) {
    throw InvalidArgument("generated matrix has numerical rank " + std::to_string(g.rank) +
                          " instead of " + std::to_string(rank));
  }
  auto ap = std::make_shared<const Matrix>(a);
  auto bp = std::make_shared<const Vector>(b);
  ProblemSpec spec;
  spec.kind = ProblemKind::kDegenerateLeastSquares;
  spec.rows = m;
  spec.cols = n;
  spec.rank = rank;
  spec.seed = seed;
  spec.singular_values = profile;
  // b lies in the range of A, so F* = 0 exactly.
  return CompositeProblem(n, least_squares_term(ap, bp), g.sigma_max * g.sigma_max,
                          zero_regularizer(), least_squares_truth(g, ap, bp, 0.0), std::move(spec));
}

namespace {

struct LassoReference {
  double f_star;
  double gap_bound;
};

// Forward-backward until the duality gap certifies F(x) - F* <= 1e-14 * max(1, F).
LassoReference lasso_reference(const Matrix& a, const Vector& y, double lambda, double lip) {
  const double step = 1.0 / lip;
  Vector x = Vector::Zero(a.cols());
  constexpr long kMaxIter = 5'000'000;
  constexpr double kTargetGap = 1e-14;
  double best_gap = std::numeric_limits<double>::infinity();
  double value = 0.0;
  for (long k = 0; k <= kMaxIter; ++k) {
    if (k % 25 == 0) {
      const Vector r = y - a * x;
      value = 0.5 * r.squaredNorm() + lambda * x.lpNorm<1>();
      const double dual_norm = (a.transpose() * r).lpNorm<Eigen::Infinity>();
      const double scale = dual_norm > lambda ? lambda / dual_norm : 1.0;
      const Vector theta = scale * r;
      const double dual = theta.dot(y) - 0.5 * theta.squaredNorm();
      best_gap = std::max(0.0, value - dual);
      if (best_gap <= kTargetGap * std::max(1.0, std::abs(value))) break;
    }
    x = soft_threshold(x - step * (a.transpose() * (a * x - y)), step * lambda);
  }
  if (best_gap > 1e-10 * std::max(1.0, std::abs(value))) {
    throw NumericalFailure("LASSO reference solve did not certify F* (gap " +
                           std::to_string(best_gap) + ")");
  }
  return {value, best_gap};
}

}  // namespace

CompositeProblem make_lasso(const Matrix& a, const Vector& y, double lambda,
                            std::optional<double> mu, std::optional<double> known_f_star) {
  require(lambda > 0.0, "LASSO weight lambda must be positive");
  require(a.rows() == y.size(), "LASSO: rows of A must match size of y");
  require(a.size() > 0 && a.norm() > 0.0, "LASSO: A must be nonzero");
  Eigen::JacobiSVD<Matrix> svd(a);
  const double sigma_max = svd.singularValues()(0);
  const double lip = sigma_max * sigma_max;

  GroundTruth gt;
  gt.numeric_reference = true;
  if (known_f_star) {
    gt.f_star = *known_f_star;
  } else {
    const LassoReference ref = lasso_reference(a, y, lambda, lip);
    gt.f_star = ref.f_star;
    gt.f_star_error_bound = ref.gap_bound;
  }
  if (mu) gt.mu = *mu;

  auto ap = std::make_shared<const Matrix>(a);
  auto yp = std::make_shared<const Vector>(y);
  ProblemSpec spec;
  spec.kind = ProblemKind::kLasso;
  spec.rows = static_cast<int>(a.rows());
  spec.cols = static_cast<int>(a.cols());
  spec.matrix = a;
  spec.rhs = y;
  spec.lambda = lambda;
  return CompositeProblem(static_cast<int>(a.cols()), least_squares_term(ap, yp), lip,
                          l1_regularizer(lambda), std::move(gt), std::move(spec));
}

GaussianStream::GaussianStream(std::uint64_t seed) : engine_(seed) {}

double GaussianStream::uniform_open() {
  // 53 random bits mapped to (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Vector GaussianStream::vector(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = next();
  return v;
}

Matrix GaussianStream::matrix(int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = next();
  return m;
}

}  // namespace hbopt

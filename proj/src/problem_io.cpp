#include "hbopt/problem_io.hpp"

#include <cstdio>

namespace hbopt {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  require(rows.is_array() && !rows.empty(), "matrix must be a non-empty array of rows");
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = static_cast<Eigen::Index>(rows.at(0).size());
  require(n_cols > 0, "matrix rows must be non-empty");
  Matrix m(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const json& row = rows.at(i);
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n_cols,
            "matrix rows must all have the same length");
    for (Eigen::Index j = 0; j < n_cols; ++j) m(i, j) = row.at(j).get<double>();
  }
  return m;
}

Vector vector_from_json(const json& values) {
  require(values.is_array(), "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i].get<double>();
  return v;
}

}  // namespace

json problem_to_json(const CompositeProblem& p) {
  const ProblemSpec& spec = p.spec();
  require(spec.kind != ProblemKind::kCustom, "custom problems are not serializable");
  json doc;
  doc["kind"] = to_string(spec.kind);
  doc["dims"] = {{"m", spec.rows}, {"n", spec.cols}, {"rank", spec.rank}};
  if (spec.kind == ProblemKind::kDegenerateLeastSquares) {
    doc["seed"] = spec.seed;
    doc["singular_values"] = spec.singular_values;
  } else {
    doc["matrix"] = matrix_to_json(spec.matrix);
    doc["rhs"] = std::vector<double>(spec.rhs.data(), spec.rhs.data() + spec.rhs.size());
  }
  if (spec.kind == ProblemKind::kLasso) doc["lambda"] = spec.lambda;
  if (const auto& gt = p.geometry()) {
    json truth;
    truth["f_star"] = gt->f_star;
    truth["mu"] = gt->mu ? json(*gt->mu) : json(nullptr);
    truth["L"] = p.lipschitz();
    truth["numeric_reference"] = gt->numeric_reference;
    doc["ground_truth"] = std::move(truth);
  }
  return doc;
}

CompositeProblem problem_from_json(const json& doc) {
  require(doc.is_object(), "problem document must be a JSON object");
  const ProblemKind kind = problem_kind_from_string(doc.at("kind").get<std::string>());
  switch (kind) {
    case ProblemKind::kDegenerateLeastSquares: {
      const json& dims = doc.at("dims");
      std::vector<double> profile;
      const int rank = dims.at("rank").get<int>();
      if (doc.contains("singular_values")) {
        profile = doc["singular_values"].get<std::vector<double>>();
      } else if (doc.contains("kappa")) {
        profile = geometric_profile(rank, doc["kappa"].get<double>());
      }
      return make_degenerate_least_squares(dims.at("m").get<int>(), dims.at("n").get<int>(),
                                           rank, doc.value("seed", std::uint64_t{0}), profile);
    }
    case ProblemKind::kLeastSquares:
      return make_least_squares(matrix_from_json(doc.at("matrix")), vector_from_json(doc.at("rhs")));
    case ProblemKind::kLasso: {
      std::optional<double> mu;
      std::optional<double> f_star;
      if (doc.contains("ground_truth")) {
        const json& truth = doc["ground_truth"];
        if (truth.contains("mu") && !truth["mu"].is_null()) mu = truth["mu"].get<double>();
        if (truth.contains("f_star") && !truth["f_star"].is_null()) f_star = truth["f_star"].get<double>();
      }
      return make_lasso(matrix_from_json(doc.at("matrix")), vector_from_json(doc.at("rhs")),
                        doc.at("lambda").get<double>(), mu, f_star);
    }
    case ProblemKind::kCustom: break;
  }
  throw InvalidArgument("unsupported problem kind");
}

std::uint64_t problem_hash(const CompositeProblem& p) {
  const std::string canonical = problem_to_json(p).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex_digest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace hbopt

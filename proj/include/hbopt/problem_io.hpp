#pragma once

#include "hbopt/problems.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace hbopt {

/// {kind, dims{m,n,rank}, seed, singular_values | matrix + rhs, lambda,
///  ground_truth{f_star, mu, L, numeric_reference}}. Matrices are row-major
/// nested arrays.
nlohmann::json problem_to_json(const CompositeProblem& p);

/// Rebuilds a problem. Generated problems are regenerated from (dims, seed,
/// profile); a bare `kappa` selects the geometric profile. Explicit ones are
/// read from their entries. A LASSO ground_truth.f_star,
/// when present, is reused instead of re-solving.
CompositeProblem problem_from_json(const nlohmann::json& doc);

/// Stable 64-bit FNV-1a digest of the canonical problem document.
std::uint64_t problem_hash(const CompositeProblem& p);
std::string hex_digest(std::uint64_t value);

}  // namespace hbopt

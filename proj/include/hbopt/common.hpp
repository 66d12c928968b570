#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hbopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Bad input, unsupported regime or a precondition the caller can fix.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produced NaN/Inf or could not certify a value.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace hbopt

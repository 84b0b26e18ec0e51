#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace staf {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Caller broke a precondition (dimension mismatch, bad window, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left the representable range (kernel overflow, rank loss).
class NumericRangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Invalid construction-time configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace staf

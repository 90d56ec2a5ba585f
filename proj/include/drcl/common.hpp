#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <charconv>
#include <stdexcept>
#include <string>

namespace drcl {

using Real = double;
using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RowVectorX = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<Real, Eigen::RowMajor>;

/// Bad input: malformed files, out-of-range ids, violated preconditions.
/// The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parse failure that knows where it happened.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Shape mismatch between operands; the message names the operation.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Non-finite values or other numerical breakdown. The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to exactly `v`.
inline std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace drcl

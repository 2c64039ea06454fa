#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace nexos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The distinguished "infinite" objective value (indicator outside the set).
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised for malformed inputs: dimension mismatch, out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical kernel fails (factorization, SVD, inner budget).
/// `residual` carries the last achieved residual when one is meaningful.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Problem family tag shared by losses, sets and problem instances.
enum class Family { SR, RM, MC, FA, Custom };

const char* to_string(Family family);

/// Matrix variables live in a flat column-major buffer; this records the
/// logical (rows, cols) of that buffer.
struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

inline Eigen::Map<const Matrix> as_matrix(const Vector& flat, Shape shape) {
  return Eigen::Map<const Matrix>(flat.data(), shape.rows, shape.cols);
}

inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline void require_size(const Vector& x, Eigen::Index expected, const char* what) {
  if (x.size() != expected) {
    throw InputError(std::string(what) + ": dimension mismatch (got " + std::to_string(x.size()) +
                     ", expected " + std::to_string(expected) + ")");
  }
}

}  // namespace nexos

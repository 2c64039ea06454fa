#pragma once

#include "nexos/core.hpp"
#include "nexos/operators.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nexos {

/// Factorizations keyed on the proximal parameter. Filled lazily; lookups and
/// inserts are serialized so concurrent solves may share one loss.
class GramSolverCache {
 public:
  explicit GramSolverCache(Matrix M) : M_(std::move(M)) {}

  /// Solver for (I + 2 gamma M^T M).
  std::shared_ptr<const ShiftedGramSolver> get(double gamma) const;

  const Matrix& matrix() const { return M_; }

 private:
  Matrix M_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const ShiftedGramSolver>> solvers_;
};

/// f(x) = ||A x - b||^2.
class LeastSquaresLoss final : public SmoothLoss {
 public:
  LeastSquaresLoss(Matrix A, Vector b);

  Family family() const override { return Family::SR; }
  Eigen::Index dimension() const override { return cache_.matrix().cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector prox(const Vector& z, double gamma) const override;

  const Matrix& A() const { return cache_.matrix(); }
  const Vector& b() const { return b_; }

 private:
  GramSolverCache cache_;
  Vector b_;
  Vector Atb_;
};

/// f(X) = sum over observed (i, j) of (X_ij - Z_ij)^2.
class MaskedLeastSquaresLoss final : public SmoothLoss {
 public:
  MaskedLeastSquaresLoss(Shape shape, std::vector<Observation> observations);

  Family family() const override { return Family::MC; }
  Eigen::Index dimension() const override { return shape_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector prox(const Vector& z, double gamma) const override;

  Shape shape() const { return shape_; }
  const std::vector<Observation>& observations() const { return obs_; }

 private:
  Shape shape_;
  std::vector<Observation> obs_;
};

/// f(X) = ||A(X) - b||^2 with A(X)_i = tr(A_i^T X).
class AffineMapLeastSquaresLoss final : public SmoothLoss {
 public:
  AffineMapLeastSquaresLoss(Shape shape, const std::vector<Matrix>& A_mats, Vector b);

  Family family() const override { return Family::RM; }
  Eigen::Index dimension() const override { return shape_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector prox(const Vector& z, double gamma) const override;

  Shape shape() const { return shape_; }
  /// k x (rows * cols); row i is vec(A_i)^T.
  const Matrix& measurement_matrix() const { return cache_.matrix(); }
  const Vector& b() const { return b_; }

 private:
  Shape shape_;
  GramSolverCache cache_;
  Vector b_;
  Vector Mtb_;
};

/// f(X, d) = ||Sigma - X - diag(d)||_F^2 over the flat factor-analysis layout.
/// The convex constraints X PSD, d >= 0, Sigma - diag(d) PSD are enforced by
/// the prox only; value and gradient are those of the smooth quadratic.
class FactorAnalysisLoss final : public SmoothLoss {
 public:
  explicit FactorAnalysisLoss(Matrix Sigma, FaProxOptions options = {});

  Family family() const override { return Family::FA; }
  Eigen::Index dimension() const override { return p_ * p_ + p_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector prox(const Vector& z, double gamma) const override;

  const Matrix& Sigma() const { return Sigma_; }

 private:
  Matrix Sigma_;
  Eigen::Index p_;
  FaProxOptions options_;
};

/// f = (nu-envelope of a nonsmooth convex phi) + (beta_inner / 2)||.||^2.
class SmoothedLoss final : public SmoothLoss {
 public:
  SmoothedLoss(SmoothedFunction fun, Eigen::Index dimension);

  Family family() const override { return Family::Custom; }
  Eigen::Index dimension() const override { return n_; }
  double value(const Vector& x) const override { return fun_.value(x); }
  Vector gradient(const Vector& x) const override { return smoothed_gradient(fun_, x); }
  Vector prox(const Vector& z, double gamma) const override { return smoothed_prox(fun_, gamma, z); }

  const SmoothedFunction& function() const { return fun_; }

 private:
  SmoothedFunction fun_;
  Eigen::Index n_;
};

/// User-supplied loss.
class CallableLoss final : public SmoothLoss {
 public:
  using Value = std::function<double(const Vector&)>;
  using Gradient = std::function<Vector(const Vector&)>;
  using Prox = std::function<Vector(const Vector&, double)>;

  CallableLoss(Eigen::Index dimension, Value value, Gradient gradient, Prox prox);

  Family family() const override { return Family::Custom; }
  Eigen::Index dimension() const override { return n_; }
  double value(const Vector& x) const override { return value_(x); }
  Vector gradient(const Vector& x) const override { return gradient_(x); }
  Vector prox(const Vector& z, double gamma) const override { return prox_(z, gamma); }

 private:
  Eigen::Index n_;
  Value value_;
  Gradient gradient_;
  Prox prox_;
};

}  // namespace nexos

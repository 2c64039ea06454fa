#pragma once

#include "nexos/core.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace nexos {

// ---------------------------------------------------------------------------
// Projections onto the nonconvex constraint sets

/// Keep the k largest-magnitude entries (ties go to the lower index), zero the
/// rest and clamp the survivors to [-bound, bound].
Vector project_sparse_box(const Vector& x, Eigen::Index k, double bound);

/// Full SVD, keep the leading r singular values clamped to `bound`, rebuild.
Matrix project_rank_spectral(const Matrix& X, Eigen::Index r, double bound);

/// Projection onto the PSD cone by eigenvalue clamping. X is symmetrized first.
Matrix project_psd(const Matrix& X);

/// Factor-analysis variable: a symmetric matrix block and a diagonal stored as a vector.
struct FaPoint {
  Matrix X;
  Vector d;
};

/// Product-set projection: rank/spectral on X, max(d, 0) on d.
FaPoint project_fa_set(const Matrix& X, const Vector& d, Eigen::Index r, double bound);

// ---------------------------------------------------------------------------
// Douglas-Rachford helpers

struct DrsConstants {
  double kappa = 1.0;
  double theta = 1.0;

  /// kappa = 1 / (beta gamma + 1), theta = mu / (gamma kappa + mu).
  static DrsConstants make(double gamma, double mu, double beta);
};

/// prox of gamma * (d^2 / (2 mu) + (beta / 2)||.||^2) at x:
/// theta kappa x + (1 - theta) Pi(kappa x).
Vector prox_penalized_indicator(const Vector& x, const ProjectableSet& set, double gamma, double mu, double beta);

// ---------------------------------------------------------------------------
// Proximal operators of the convex losses

/// Solves (I + c M^T M) y = rhs for a fixed c, choosing the smaller of the
/// primal (n x n) and Woodbury (k x k) Cholesky factorizations.
class ShiftedGramSolver {
 public:
  ShiftedGramSolver(const Matrix& M, double c);

  Vector solve(const Vector& rhs) const;

 private:
  Matrix M_;  // kept only for the Woodbury form
  double c_;
  bool woodbury_;
  Eigen::LLT<Matrix> llt_;
};

/// argmin_y ||A y - b||^2 + (1 / (2 gamma)) ||y - z||^2, uncached.
Vector prox_least_squares(const Matrix& A, const Vector& b, double gamma, const Vector& z);

struct Observation {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

/// Throws InputError for out-of-range or repeated (row, col) pairs.
void validate_observations(const std::vector<Observation>& obs, Shape shape);

/// Entrywise: (V_ij + 2 gamma Z_ij) / (1 + 2 gamma) on observed entries, V_ij elsewhere.
Matrix prox_masked_least_squares(const std::vector<Observation>& obs, double gamma, const Matrix& V);

/// Rows of the returned matrix are vec(A_i)^T.
Matrix stack_measurements(const std::vector<Matrix>& A_mats, Shape shape);

Matrix prox_affine_map_least_squares(const std::vector<Matrix>& A_mats, const Vector& b, double gamma,
                                     const Matrix& V);

struct FaProxOptions {
  double tolerance = 1e-6;          // gradient-mapping residual
  double dykstra_tolerance = 1e-8;
  int max_iterations = 500;
  int max_dykstra_iterations = 200;
};

/// Approximate minimizer of
///   ||Sigma - Xt - diag(dt)||_F^2 + (1/(2 gamma)) (||Xt - X||_F^2 + ||dt - d||^2)
/// over Xt PSD, dt >= 0, Sigma - diag(dt) PSD, by projected gradient.
/// Throws NumericalError (carrying the residual) when the budget runs out.
FaPoint prox_fa_loss(const Matrix& Sigma, double gamma, const Matrix& X, const Vector& d,
                     const FaProxOptions& options = {});

/// Euclidean projection of d onto {d >= 0, Sigma - diag(d) PSD} by Dykstra's
/// alternating projections.
Vector project_fa_diagonal(const Matrix& Sigma, const Vector& d, double tolerance = 1e-8, int max_iterations = 200);

// ---------------------------------------------------------------------------
// Moreau-envelope smoothing of a nonsmooth convex function

/// A proper closed convex function with an inexpensive prox.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;
  virtual double value(const Vector& x) const = 0;
  /// argmin_y phi(y) + (1 / (2 t)) ||y - x||^2.
  virtual Vector prox(const Vector& x, double t) const = 0;
};

/// phi(x) = ||x||_1 (the absolute value in one dimension).
class L1Norm final : public ConvexFunction {
 public:
  double value(const Vector& x) const override { return x.lpNorm<1>(); }
  Vector prox(const Vector& x, double t) const override;
};

/// f = (nu-envelope of phi) + (beta_inner / 2) ||.||^2.
struct SmoothedFunction {
  std::shared_ptr<const ConvexFunction> base;
  double nu = 1.0;
  double beta_inner = 0.0;

  double value(const Vector& x) const;
};

Vector smoothed_prox(const SmoothedFunction& fun, double gamma, const Vector& x);
Vector smoothed_gradient(const SmoothedFunction& fun, const Vector& x);

}  // namespace nexos

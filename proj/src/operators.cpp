#include "nexos/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace nexos {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

Vector project_sparse_box(const Vector& x, Eigen::Index k, double bound) {
  const Eigen::Index n = x.size();
  if (k < 1 || k > n) throw InputError("project_sparse_box: k must lie in [1, dim(x)]");
  if (!(bound > 0.0)) throw InputError("project_sparse_box: bound must be positive");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Total order: larger magnitude first, then lower index.
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(x(a));
    const double mb = std::abs(x(b));
    return ma > mb || (ma == mb && a < b);
  });

  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index j = order[static_cast<std::size_t>(i)];
    out(j) = std::clamp(x(j), -bound, bound);
  }
  return out;
}

Matrix project_rank_spectral(const Matrix& X, Eigen::Index r, double bound) {
  const Eigen::Index p = std::min(X.rows(), X.cols());
  if (r < 1 || r > p) throw InputError("project_rank_spectral: r must lie in [1, min(rows, cols)]");
  if (!(bound > 0.0)) throw InputError("project_rank_spectral: bound must be positive");
  if (!all_finite(X)) throw NumericalError("project_rank_spectral: input contains non-finite entries");

  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("project_rank_spectral: SVD failed for a " + std::to_string(X.rows()) + "x" +
                         std::to_string(X.cols()) + " matrix with Frobenius norm " + std::to_string(X.norm()));
  }
  Vector sigma = svd.singularValues().head(r).cwiseMin(bound);
  return svd.matrixU().leftCols(r) * sigma.asDiagonal() * svd.matrixV().leftCols(r).transpose();
}

Matrix project_psd(const Matrix& X) {
  if (X.rows() != X.cols()) throw InputError("project_psd: matrix must be square");
  const Matrix sym = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("project_psd: eigendecomposition failed");
  const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
  Matrix out = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

FaPoint project_fa_set(const Matrix& X, const Vector& d, Eigen::Index r, double bound) {
  if (X.rows() != X.cols() || X.rows() != d.size()) throw InputError("project_fa_set: dimension mismatch");
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw InputError("project_fa_set: X is not symmetric");
  Matrix proj = project_rank_spectral(X, r, bound);
  return {0.5 * (proj + proj.transpose()), d.cwiseMax(0.0)};
}

DrsConstants DrsConstants::make(double gamma, double mu, double beta) {
  if (!(gamma > 0.0) || !(mu > 0.0) || !(beta >= 0.0)) throw InputError("DrsConstants: invalid parameters");
  DrsConstants c;
  c.kappa = 1.0 / (beta * gamma + 1.0);
  c.theta = mu / (gamma * c.kappa + mu);
  return c;
}

Vector prox_penalized_indicator(const Vector& x, const ProjectableSet& set, double gamma, double mu, double beta) {
  require_size(x, set.dimension(), "prox_penalized_indicator");
  const DrsConstants c = DrsConstants::make(gamma, mu, beta);
  const Vector scaled = c.kappa * x;
  return c.theta * scaled + (1.0 - c.theta) * set.project(scaled);
}

ShiftedGramSolver::ShiftedGramSolver(const Matrix& M, double c) : c_(c), woodbury_(M.rows() < M.cols()) {
  if (!(c >= 0.0)) throw InputError("ShiftedGramSolver: shift must be nonnegative");
  if (woodbury_) {
    M_ = M;
    Matrix K = Matrix::Identity(M.rows(), M.rows());
    K.selfadjointView<Eigen::Lower>().rankUpdate(M, c);
    llt_.compute(K);
  } else {
    Matrix G = Matrix::Identity(M.cols(), M.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(M.transpose(), c);
    llt_.compute(G);
  }
  if (llt_.info() != Eigen::Success) throw NumericalError("ShiftedGramSolver: Cholesky factorization failed");
}

Vector ShiftedGramSolver::solve(const Vector& rhs) const {
  if (!woodbury_) return llt_.solve(rhs);
  // (I + c M^T M)^{-1} = I - c M^T (I + c M M^T)^{-1} M
  const Vector t = llt_.solve(M_ * rhs);
  return rhs - c_ * (M_.transpose() * t);
}

Vector prox_least_squares(const Matrix& A, const Vector& b, double gamma, const Vector& z) {
  if (A.rows() != b.size() || A.cols() != z.size()) throw InputError("prox_least_squares: dimension mismatch");
  if (!(gamma > 0.0)) throw InputError("prox_least_squares: gamma must be positive");
  ShiftedGramSolver solver(A, 2.0 * gamma);
  return solver.solve(z + 2.0 * gamma * (A.transpose() * b));
}

void validate_observations(const std::vector<Observation>& obs, Shape shape) {
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  for (const auto& o : obs) {
    if (o.row < 0 || o.row >= shape.rows || o.col < 0 || o.col >= shape.cols)
      throw InputError("observation index (" + std::to_string(o.row) + ", " + std::to_string(o.col) +
                       ") out of bounds");
    if (!seen.emplace(o.row, o.col).second)
      throw InputError("duplicate observation at (" + std::to_string(o.row) + ", " + std::to_string(o.col) + ")");
  }
}

Matrix prox_masked_least_squares(const std::vector<Observation>& obs, double gamma, const Matrix& V) {
  if (!(gamma > 0.0)) throw InputError("prox_masked_least_squares: gamma must be positive");
  validate_observations(obs, {V.rows(), V.cols()});
  Matrix out = V;
  const double scale = 1.0 / (1.0 + 2.0 * gamma);
  for (const auto& o : obs) out(o.row, o.col) = (V(o.row, o.col) + 2.0 * gamma * o.value) * scale;
  return out;
}

Matrix stack_measurements(const std::vector<Matrix>& A_mats, Shape shape) {
  Matrix M(static_cast<Eigen::Index>(A_mats.size()), shape.size());
  for (std::size_t i = 0; i < A_mats.size(); ++i) {
    const Matrix& Ai = A_mats[i];
    if (Ai.rows() != shape.rows || Ai.cols() != shape.cols)
      throw InputError("measurement matrix " + std::to_string(i) + " does not match the variable shape");
    M.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vector>(Ai.data(), Ai.size()).transpose();
  }
  return M;
}

Matrix prox_affine_map_least_squares(const std::vector<Matrix>& A_mats, const Vector& b, double gamma,
                                     const Matrix& V) {
  if (!(gamma > 0.0)) throw InputError("prox_affine_map_least_squares: gamma must be positive");
  if (static_cast<Eigen::Index>(A_mats.size()) != b.size())
    throw InputError("prox_affine_map_least_squares: measurement count mismatch");
  if (A_mats.empty()) return V;
  const Shape shape{V.rows(), V.cols()};
  const Matrix M = stack_measurements(A_mats, shape);
  ShiftedGramSolver solver(M, 2.0 * gamma);
  const Vector y = solver.solve(flatten(V) + 2.0 * gamma * (M.transpose() * b));
  return as_matrix(y, shape);
}

Vector project_fa_diagonal(const Matrix& Sigma, const Vector& d, double tolerance, int max_iterations) {
  const Eigen::Index p = d.size();
  if (Sigma.rows() != p || Sigma.cols() != p) throw InputError("project_fa_diagonal: dimension mismatch");

  const Vector clamped = d.cwiseMax(0.0);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Sigma - Matrix(clamped.asDiagonal()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() >= 0.0) return clamped;
  }

  // Dykstra between A = {diag(v) : v >= 0} and B = {M : Sigma - M PSD}.
  auto project_a = [](const Matrix& M) { return Matrix(M.diagonal().cwiseMax(0.0).asDiagonal()); };
  auto project_b = [&](const Matrix& M) { return Matrix(Sigma - project_psd(Sigma - M)); };

  Matrix x = d.asDiagonal();
  Matrix p_inc = Matrix::Zero(p, p);
  Matrix q_inc = Matrix::Zero(p, p);
  Matrix y = project_a(x);
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix y_new = project_a(x + p_inc);
    p_inc = x + p_inc - y_new;
    const Matrix x_new = project_b(y_new + q_inc);
    q_inc = y_new + q_inc - x_new;
    const double change = (y_new - y).norm() + (x_new - x).norm();
    y = y_new;
    x = x_new;
    if (change <= tolerance) break;
  }
  return y.diagonal();
}

FaPoint prox_fa_loss(const Matrix& Sigma, double gamma, const Matrix& X, const Vector& d,
                     const FaProxOptions& options) {
  const Eigen::Index p = Sigma.rows();
  if (Sigma.cols() != p || X.rows() != p || X.cols() != p || d.size() != p)
    throw InputError("prox_fa_loss: dimension mismatch");
  if (!(gamma > 0.0)) throw InputError("prox_fa_loss: gamma must be positive");

  // Hessian of the quadratic has norm 2 * ||T||^2 + 1/gamma with T(X, d) = X + diag(d), ||T||^2 = 2.
  const double lipschitz = 4.0 + 1.0 / gamma;
  const double step = 1.0 / lipschitz;

  Matrix Xt = project_psd(X);
  Vector dt = project_fa_diagonal(Sigma, d, options.dykstra_tolerance, options.max_dykstra_iterations);
  double residual = kInfinity;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Matrix R = Sigma - Xt - Matrix(dt.asDiagonal());
    const Matrix grad_X = -2.0 * R + (Xt - X) / gamma;
    const Vector grad_d = -2.0 * R.diagonal() + (dt - d) / gamma;

    Matrix X_next = project_psd(Xt - step * grad_X);
    Vector d_next = project_fa_diagonal(Sigma, dt - step * grad_d, options.dykstra_tolerance,
                                        options.max_dykstra_iterations);
    residual = std::sqrt((X_next - Xt).squaredNorm() + (d_next - dt).squaredNorm()) / step;
    Xt = std::move(X_next);
    dt = std::move(d_next);
    if (residual <= options.tolerance) return {Xt, dt};
  }
  throw NumericalError("prox_fa_loss: projected gradient budget exhausted with residual " + std::to_string(residual),
                       residual);
}

Vector L1Norm::prox(const Vector& x, double t) const {
  return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
}

double SmoothedFunction::value(const Vector& x) const {
  const Vector p = base->prox(x, nu);
  return base->value(p) + (x - p).squaredNorm() / (2.0 * nu) + 0.5 * beta_inner * x.squaredNorm();
}

Vector smoothed_prox(const SmoothedFunction& fun, double gamma, const Vector& x) {
  if (!(gamma > 0.0) || !(fun.nu > 0.0)) throw InputError("smoothed_prox: gamma and nu must be positive");
  const double shrink = 1.0 / (gamma * fun.beta_inner + 1.0);
  const double scaled_gamma = gamma * shrink;
  const double t = scaled_gamma + fun.nu;
  const Vector u = shrink * x;
  return u + (scaled_gamma / t) * (fun.base->prox(u, t) - u);
}

Vector smoothed_gradient(const SmoothedFunction& fun, const Vector& x) {
  if (!(fun.nu > 0.0)) throw InputError("smoothed_gradient: nu must be positive");
  return (x - fun.base->prox(x, fun.nu)) / fun.nu + fun.beta_inner * x;
}

}  // namespace nexos

#pragma once

#include "nexos/operators.hpp"
#include "nexos/problem_instance.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nexos {

// ---------------------------------------------------------------------------
// Builders

/// minimize ||A x - b||^2 + (beta/2)||x||^2  s.t.  card(x) <= k, ||x||_inf <= bound.
ProblemInstance build_sparse_regression(Matrix A, Vector b, Eigen::Index k, double bound);

/// minimize ||A(X) - b||^2 + (beta/2)||X||_F^2  s.t.  rank(X) <= r, ||X||_2 <= bound.
ProblemInstance build_rank_minimization(const std::vector<Matrix>& A_mats, Vector b, Shape shape, Eigen::Index r,
                                        double bound);

/// Gamma = ||Y||_F where Y fills every unobserved entry with max |Z_ij| over observed entries.
double matrix_completion_bound(const std::vector<Observation>& obs, Shape shape);

/// Masked least squares over a rank/spectral set. Without a bound, it is
/// derived by matrix_completion_bound.
ProblemInstance build_matrix_completion(std::vector<Observation> obs, Shape shape, Eigen::Index r,
                                        std::optional<double> bound = std::nullopt);

/// Sigma must be symmetric PSD to 1e-8. Variable layout: vec(X) then d.
ProblemInstance build_factor_analysis(Matrix Sigma, Eigen::Index r, double bound);

// ---------------------------------------------------------------------------
// Synthetic instances

/// Noise variance sigma^2 = ||signal||^2 / (400 / m).
double snr_noise_variance(double signal_norm_squared, Eigen::Index m);

/// round(x) with ties to even.
Eigen::Index round_half_even(double x);

struct SrInstance {
  Matrix A;        // m x 2m
  Vector b;
  Vector x_true;   // card <= round(m / 5), ||.||_inf <= 1
  Eigen::Index k = 0;
  double sigma2 = 0.0;
};

SrInstance generate_sr_instance(Eigen::Index m, std::uint64_t seed);

struct RmOptions {
  /// Columns of X; 0 means 2m.
  Eigen::Index cols = 0;
  /// Rank of the planted matrix; 0 means round(m / 10).
  Eigen::Index rank = 0;
  /// Number of measurement matrices; 0 means rows * cols / 2.
  Eigen::Index measurements = 0;
};

struct RmInstance {
  std::vector<Matrix> A_mats;
  Vector b;
  Matrix X_true;
  Eigen::Index rank = 0;
  double sigma2 = 0.0;
};

/// X_true is the rank-r truncated SVD of a standard normal m x d matrix with
/// every singular value exceeding `bound` set to zero.
/// 2 (sqrt(rows) + sqrt(cols)): about twice the largest singular value of a
/// standard normal rows x cols matrix, so the planted rank survives truncation.
double rm_default_bound(Eigen::Index rows, Eigen::Index cols);

RmInstance generate_rm_instance(Eigen::Index m, std::uint64_t seed, double bound, const RmOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics

/// 100 * (number of i with sign(x_i) == sign(x_true_i)) / d, sign(0) = 0.
double metric_support_recovery(const Vector& x, const Vector& x_true);

double metric_rms(const Vector& pred, const Vector& actual);

/// sum_{i <= r} sigma_i(X) / sum_i sigma_i(Sigma - diag(d)).
double metric_explained_variance(const Matrix& X, const Vector& d, const Matrix& Sigma, Eigen::Index r);

/// Column-wise zero mean / unit deviation over observed entries only. Columns
/// with fewer than two observations or zero spread are only centered.
std::vector<Observation> standardize_columns(const std::vector<Observation>& obs, Shape shape);

}  // namespace nexos

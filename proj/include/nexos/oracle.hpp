#pragma once

#include "nexos/types.hpp"

#include <cstdint>
#include <functional>

namespace nexos {

// Brute-force references for certifying the solver on desk-scale instances.
// Each routine hard-fails outside its combinatorial budget instead of
// truncating the search.

struct OracleReport {
  double optimum = kInfinity;
  Vector argmin;
  std::int64_t candidates_examined = 0;
};

/// Global minimum of ||A x - b||^2 + (beta/2)||x||^2 over card(x) <= k,
/// ||x||_inf <= bound, by enumerating every support. Requires cols(A) <= 20
/// and k <= 6. `bound` may be +infinity.
OracleReport sr_global_opt(const Matrix& A, const Vector& b, Eigen::Index k, double bound, double beta);

struct GridResult {
  Vector point;
  double value = kInfinity;
};

/// Dense grid search over the box [lower, upper] (dimension <= 2, at most 2001
/// points per axis) followed by a shrinking coordinate pattern search. Equal
/// grid values resolve to the lexicographically smallest point.
GridResult prox_grid_oracle(const std::function<double(const Vector&)>& objective, const Vector& lower,
                            const Vector& upper, int resolution = 2001);

struct RankOracleResult {
  Matrix best;
  double best_distance = kInfinity;
  /// Nearest randomly sampled feasible candidate (excluding the analytic one).
  double best_random_distance = kInfinity;
  double analytic_distance = kInfinity;
};

/// Random search over {rank <= r, ||.||_2 <= bound} for matrices up to 3 x 3,
/// plus the truncate-and-clamp candidate. `bound` may be +infinity.
RankOracleResult rank_projection_oracle(const Matrix& X, Eigen::Index r, double bound, std::int64_t samples,
                                        std::uint64_t seed = 0);

}  // namespace nexos

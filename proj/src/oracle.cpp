#include "nexos/oracle.hpp"

#include "nexos/operators.hpp"
#include "nexos/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nexos {

namespace {

Vector clamp_box(const Vector& x, double bound) { return x.cwiseMax(-bound).cwiseMin(bound); }

/// KKT residual of min 1/2 x'Hx - g'x over |x_i| <= bound.
double box_qp_residual(const Matrix& H, const Vector& g, const Vector& x, double bound) {
  return (x - clamp_box(x - (H * x - g), bound)).norm();
}

/// Primal-dual active set iterations, then projected gradient if they stall.
Vector solve_box_qp(const Matrix& H, const Vector& g, double bound) {
  const Eigen::Index n = H.rows();
  Eigen::LDLT<Matrix> ldlt(H);
  Vector x = ldlt.solve(g);
  if (ldlt.info() == Eigen::Success && x.allFinite() && x.lpNorm<Eigen::Infinity>() <= bound &&
      box_qp_residual(H, g, x, bound) <= 1e-9 * std::max(1.0, g.norm()))
    return x;

  // -1 at lower bound, +1 at upper bound, 0 free.
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  x = clamp_box(x.allFinite() ? x : Vector::Zero(n), bound);
  for (Eigen::Index i = 0; i < n; ++i) state[static_cast<std::size_t>(i)] = x(i) >= bound ? 1 : (x(i) <= -bound ? -1 : 0);

  for (int it = 0; it < 50; ++it) {
    std::vector<Eigen::Index> free_idx;
    Vector fixed = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = state[static_cast<std::size_t>(i)];
      if (s == 0) free_idx.push_back(i);
      else fixed(i) = s * bound;
    }
    Vector candidate = fixed;
    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Matrix Hff(nf, nf);
      Vector rhs(nf);
      const Vector Hx_fixed = H * fixed;
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs(a) = g(free_idx[a]) - Hx_fixed(free_idx[a]);
        for (Eigen::Index c = 0; c < nf; ++c) Hff(a, c) = H(free_idx[a], free_idx[c]);
      }
      Eigen::LDLT<Matrix> sub(Hff);
      const Vector xf = sub.solve(rhs);
      if (sub.info() != Eigen::Success || !xf.allFinite()) break;
      for (Eigen::Index a = 0; a < nf; ++a) candidate(free_idx[a]) = xf(a);
    }
    const Vector grad = H * candidate - g;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int& s = state[static_cast<std::size_t>(i)];
      int next = s;
      if (s == 0) {
        if (candidate(i) > bound) next = 1;
        else if (candidate(i) < -bound) next = -1;
      } else if (s == 1 && grad(i) > 0.0) {
        next = 0;
      } else if (s == -1 && grad(i) < 0.0) {
        next = 0;
      }
      changed |= next != s;
      s = next;
    }
    if (!changed) {
      x = candidate;
      break;
    }
    x = clamp_box(candidate, bound);
  }

  if (box_qp_residual(H, g, x, bound) <= 1e-9) return x;

  const double lipschitz = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lipschitz, 1e-300);
  for (int it = 0; it < 1000000; ++it) {
    const Vector next = clamp_box(x - step * (H * x - g), bound);
    const bool done = (next - x).norm() / step <= 1e-9 || box_qp_residual(H, g, next, bound) <= 1e-9;
    x = next;
    if (done) break;
  }
  return x;
}

}  // namespace

OracleReport sr_global_opt(const Matrix& A, const Vector& b, Eigen::Index k, double bound, double beta) {
  const Eigen::Index d = A.cols();
  if (A.rows() != b.size()) throw InputError("sr_global_opt: rows(A) must equal dim(b)");
  if (d > 20) throw InputError("sr_global_opt: at most 20 columns supported");
  if (k < 0 || k > 6) throw InputError("sr_global_opt: k must lie in [0, 6]");
  if (!(bound > 0.0)) throw InputError("sr_global_opt: bound must be positive");
  if (!(beta >= 0.0)) throw InputError("sr_global_opt: beta must be nonnegative");

  const Matrix H_full = 2.0 * A.transpose() * A + beta * Matrix::Identity(d, d);
  const Vector g_full = 2.0 * A.transpose() * b;
  auto objective = [&](const Vector& x) { return (A * x - b).squaredNorm() + 0.5 * beta * x.squaredNorm(); };

  OracleReport report;
  report.argmin = Vector::Zero(d);
  report.optimum = objective(report.argmin);
  report.candidates_examined = 1;

  std::vector<Eigen::Index> support;
  const Eigen::Index max_size = std::min(k, d);
  auto visit = [&](auto&& self, Eigen::Index start) -> void {
    if (!support.empty()) {
      const auto s = static_cast<Eigen::Index>(support.size());
      Matrix H(s, s);
      Vector g(s);
      for (Eigen::Index a = 0; a < s; ++a) {
        g(a) = g_full(support[a]);
        for (Eigen::Index c = 0; c < s; ++c) H(a, c) = H_full(support[a], support[c]);
      }
      const Vector xs = solve_box_qp(H, g, bound);
      Vector x = Vector::Zero(d);
      for (Eigen::Index a = 0; a < s; ++a) x(support[a]) = xs(a);
      const double value = objective(x);
      ++report.candidates_examined;
      if (value < report.optimum) {
        report.optimum = value;
        report.argmin = x;
      }
    }
    if (static_cast<Eigen::Index>(support.size()) == max_size) return;
    for (Eigen::Index j = start; j < d; ++j) {
      support.push_back(j);
      self(self, j + 1);
      support.pop_back();
    }
  };
  visit(visit, 0);
  return report;
}

GridResult prox_grid_oracle(const std::function<double(const Vector&)>& objective, const Vector& lower,
                            const Vector& upper, int resolution) {
  const Eigen::Index n = lower.size();
  if (n < 1 || n > 2) throw InputError("prox_grid_oracle: dimension must be 1 or 2");
  require_size(upper, n, "prox_grid_oracle");
  if (resolution < 2 || resolution > 2001) throw InputError("prox_grid_oracle: resolution must lie in [2, 2001]");
  if ((upper.array() <= lower.array()).any()) throw InputError("prox_grid_oracle: empty box");

  const Vector spacing = (upper - lower) / static_cast<double>(resolution - 1);
  GridResult best;
  Vector y(n);
  const int outer = resolution;
  const int inner = n == 2 ? resolution : 1;
  // Lexicographic scan: first coordinate outermost, strict improvement only.
  for (int i = 0; i < outer; ++i) {
    y(0) = lower(0) + i * spacing(0);
    for (int j = 0; j < inner; ++j) {
      if (n == 2) y(1) = lower(1) + j * spacing(1);
      const double v = objective(y);
      if (v < best.value) {
        best.value = v;
        best.point = y;
      }
    }
  }

  Vector step = spacing;
  while (step.maxCoeff() > 1e-13) {
    bool improved = false;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (double dir : {-1.0, 1.0}) {
        Vector trial = best.point;
        trial(c) = std::clamp(trial(c) + dir * step(c), lower(c), upper(c));
        const double v = objective(trial);
        if (v < best.value) {
          best.value = v;
          best.point = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

RankOracleResult rank_projection_oracle(const Matrix& X, Eigen::Index r, double bound, std::int64_t samples,
                                        std::uint64_t seed) {
  if (X.rows() > 3 || X.cols() > 3 || X.size() == 0) throw InputError("rank_projection_oracle: at most 3x3 matrices");
  if (r < 1 || r > std::min(X.rows(), X.cols())) throw InputError("rank_projection_oracle: invalid rank");
  if (!(bound > 0.0)) throw InputError("rank_projection_oracle: bound must be positive");

  RankOracleResult out;
  // Truncate-and-clamp candidate; with an infinite bound this is plain Eckart-Young.
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector sigma = svd.singularValues().head(r).cwiseMin(bound);
  out.best = svd.matrixU().leftCols(r) * sigma.asDiagonal() * svd.matrixV().leftCols(r).transpose();
  out.analytic_distance = (X - out.best).norm();
  out.best_distance = out.analytic_distance;

  Rng rng(seed);
  for (std::int64_t s = 0; s < samples; ++s) {
    Matrix C = rng.normal_matrix(X.rows(), r) * rng.normal_matrix(r, X.cols());
    const double spectral = Eigen::JacobiSVD<Matrix>(C).singularValues()(0);
    if (spectral > 0.0) {
      // Random spectral radius in (0, bound] (or up to 2 ||X||_2 when unbounded).
      const double cap = std::isfinite(bound) ? bound : 2.0 * std::max(svd.singularValues()(0), 1.0);
      C *= cap * rng.uniform() / spectral;
    }
    const double dist = (X - C).norm();
    if (dist < out.best_random_distance) out.best_random_distance = dist;
    if (dist < out.best_distance) {
      out.best_distance = dist;
      out.best = C;
    }
  }
  return out;
}

}  // namespace nexos

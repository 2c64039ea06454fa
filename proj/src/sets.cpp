#include "nexos/sets.hpp"

#include "nexos/operators.hpp"

#include <algorithm>

namespace nexos {

SparseBoxSet::SparseBoxSet(Eigen::Index dimension, Eigen::Index k, double bound)
    : n_(dimension), k_(k), bound_(bound) {
  if (k < 1 || k > dimension) throw InputError("SparseBoxSet: k must lie in [1, dimension]");
  if (!(bound > 0.0)) throw InputError("SparseBoxSet: bound must be positive");
}

Vector SparseBoxSet::project(const Vector& x) const {
  require_size(x, n_, "SparseBoxSet::project");
  return project_sparse_box(x, k_, bound_);
}

bool SparseBoxSet::contains(const Vector& x, double tol) const {
  require_size(x, n_, "SparseBoxSet::contains");
  const auto nonzeros = (x.array().abs() > tol).count();
  return nonzeros <= k_ && x.lpNorm<Eigen::Infinity>() <= bound_ + tol;
}

RankSpectralSet::RankSpectralSet(Shape shape, Eigen::Index r, double bound, Family family)
    : shape_(shape), r_(r), bound_(bound), family_(family) {
  if (r < 1 || r > std::min(shape.rows, shape.cols))
    throw InputError("RankSpectralSet: r must lie in [1, min(rows, cols)]");
  if (!(bound > 0.0)) throw InputError("RankSpectralSet: bound must be positive");
}

Vector RankSpectralSet::project(const Vector& x) const {
  require_size(x, shape_.size(), "RankSpectralSet::project");
  return flatten(project_rank_spectral(as_matrix(x, shape_), r_, bound_));
}

namespace {

bool low_rank_bounded(const Matrix& X, Eigen::Index r, double bound, double tol) {
  const Vector sigma = Eigen::BDCSVD<Matrix>(X).singularValues();
  if (sigma.size() == 0) return true;
  const double cutoff = tol * std::max(1.0, sigma(0));
  const auto rank = (sigma.array() > cutoff).count();
  return rank <= r && sigma(0) <= bound * (1.0 + tol) + tol;
}

}  // namespace

bool RankSpectralSet::contains(const Vector& x, double tol) const {
  require_size(x, shape_.size(), "RankSpectralSet::contains");
  return low_rank_bounded(as_matrix(x, shape_), r_, bound_, tol);
}

Matrix fa_matrix_block(const Vector& x, Eigen::Index p) {
  return Eigen::Map<const Matrix>(x.data(), p, p);
}

Vector fa_diagonal_block(const Vector& x, Eigen::Index p) { return x.segment(p * p, p); }

Vector fa_join(const Matrix& X, const Vector& d) {
  Vector out(X.size() + d.size());
  out.head(X.size()) = flatten(X);
  out.tail(d.size()) = d;
  return out;
}

FactorAnalysisSet::FactorAnalysisSet(Eigen::Index p, Eigen::Index r, double bound) : p_(p), r_(r), bound_(bound) {
  if (p < 1) throw InputError("FactorAnalysisSet: order must be positive");
  if (r < 1 || r > p) throw InputError("FactorAnalysisSet: r must lie in [1, p]");
  if (!(bound > 0.0)) throw InputError("FactorAnalysisSet: bound must be positive");
}

Vector FactorAnalysisSet::project(const Vector& x) const {
  require_size(x, dimension(), "FactorAnalysisSet::project");
  const Matrix X = fa_matrix_block(x, p_);
  // The set lives in the symmetric matrices, so project the symmetric part.
  const FaPoint out = project_fa_set(0.5 * (X + X.transpose()), fa_diagonal_block(x, p_), r_, bound_);
  return fa_join(out.X, out.d);
}

bool FactorAnalysisSet::contains(const Vector& x, double tol) const {
  require_size(x, dimension(), "FactorAnalysisSet::contains");
  const Matrix X = fa_matrix_block(x, p_);
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, X.cwiseAbs().maxCoeff())) return false;
  if (fa_diagonal_block(x, p_).minCoeff() < -tol) return false;
  return low_rank_bounded(X, r_, bound_, tol);
}

FinitePointSet::FinitePointSet(std::vector<Vector> points) : points_(std::move(points)) {
  if (points_.empty()) throw InputError("FinitePointSet: at least one point required");
  for (const auto& p : points_)
    if (p.size() != points_.front().size()) throw InputError("FinitePointSet: points differ in dimension");
}

Vector FinitePointSet::project(const Vector& x) const {
  require_size(x, dimension(), "FinitePointSet::project");
  const Vector* best = nullptr;
  double best_dist = kInfinity;
  for (const auto& p : points_) {
    const double dist = (x - p).squaredNorm();
    const bool lex_smaller =
        best && std::lexicographical_compare(p.data(), p.data() + p.size(), best->data(), best->data() + best->size());
    if (dist < best_dist || (dist == best_dist && lex_smaller)) {
      best = &p;
      best_dist = dist;
    }
  }
  return *best;
}

bool FinitePointSet::contains(const Vector& x, double tol) const {
  require_size(x, dimension(), "FinitePointSet::contains");
  return std::any_of(points_.begin(), points_.end(),
                     [&](const Vector& p) { return (x - p).lpNorm<Eigen::Infinity>() <= tol; });
}

CallableSet::CallableSet(Eigen::Index dimension, Projection project, Membership contains)
    : n_(dimension), project_(std::move(project)), contains_(std::move(contains)) {
  if (!project_ || !contains_) throw InputError("CallableSet: projection and membership callables required");
}

Vector CallableSet::project(const Vector& x) const {
  require_size(x, n_, "CallableSet::project");
  Vector out = project_(x);
  require_size(out, n_, "CallableSet projection output");
  return out;
}

bool CallableSet::contains(const Vector& x, double tol) const {
  require_size(x, n_, "CallableSet::contains");
  return contains_(x, tol);
}

}  // namespace nexos

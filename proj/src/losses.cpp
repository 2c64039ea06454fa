#include "nexos/losses.hpp"

#include "nexos/sets.hpp"

namespace nexos {

std::shared_ptr<const ShiftedGramSolver> GramSolverCache::get(double gamma) const {
  if (!(gamma > 0.0)) throw InputError("prox: gamma must be positive");
  std::lock_guard lock(mutex_);
  auto it = solvers_.find(gamma);
  if (it == solvers_.end()) it = solvers_.emplace(gamma, std::make_shared<ShiftedGramSolver>(M_, 2.0 * gamma)).first;
  return it->second;
}

LeastSquaresLoss::LeastSquaresLoss(Matrix A, Vector b) : cache_(std::move(A)), b_(std::move(b)) {
  if (cache_.matrix().rows() != b_.size()) throw InputError("LeastSquaresLoss: rows(A) must equal dim(b)");
  Atb_ = cache_.matrix().transpose() * b_;
}

double LeastSquaresLoss::value(const Vector& x) const {
  require_size(x, dimension(), "LeastSquaresLoss::value");
  return (A() * x - b_).squaredNorm();
}

Vector LeastSquaresLoss::gradient(const Vector& x) const {
  require_size(x, dimension(), "LeastSquaresLoss::gradient");
  return 2.0 * (A().transpose() * (A() * x - b_));
}

Vector LeastSquaresLoss::prox(const Vector& z, double gamma) const {
  require_size(z, dimension(), "LeastSquaresLoss::prox");
  return cache_.get(gamma)->solve(z + 2.0 * gamma * Atb_);
}

MaskedLeastSquaresLoss::MaskedLeastSquaresLoss(Shape shape, std::vector<Observation> observations)
    : shape_(shape), obs_(std::move(observations)) {
  validate_observations(obs_, shape_);
}

double MaskedLeastSquaresLoss::value(const Vector& x) const {
  require_size(x, dimension(), "MaskedLeastSquaresLoss::value");
  const auto X = as_matrix(x, shape_);
  double total = 0.0;
  for (const auto& o : obs_) {
    const double r = X(o.row, o.col) - o.value;
    total += r * r;
  }
  return total;
}

Vector MaskedLeastSquaresLoss::gradient(const Vector& x) const {
  require_size(x, dimension(), "MaskedLeastSquaresLoss::gradient");
  const auto X = as_matrix(x, shape_);
  Matrix G = Matrix::Zero(shape_.rows, shape_.cols);
  for (const auto& o : obs_) G(o.row, o.col) = 2.0 * (X(o.row, o.col) - o.value);
  return flatten(G);
}

Vector MaskedLeastSquaresLoss::prox(const Vector& z, double gamma) const {
  require_size(z, dimension(), "MaskedLeastSquaresLoss::prox");
  if (!(gamma > 0.0)) throw InputError("prox: gamma must be positive");
  // Observations were validated at construction; apply the entrywise formula directly.
  Vector out = z;
  const double scale = 1.0 / (1.0 + 2.0 * gamma);
  for (const auto& o : obs_) {
    const Eigen::Index idx = o.row + o.col * shape_.rows;
    out(idx) = (z(idx) + 2.0 * gamma * o.value) * scale;
  }
  return out;
}

AffineMapLeastSquaresLoss::AffineMapLeastSquaresLoss(Shape shape, const std::vector<Matrix>& A_mats, Vector b)
    : shape_(shape), cache_(stack_measurements(A_mats, shape)), b_(std::move(b)) {
  if (static_cast<Eigen::Index>(A_mats.size()) != b_.size())
    throw InputError("AffineMapLeastSquaresLoss: measurement count must equal dim(b)");
  Mtb_ = cache_.matrix().transpose() * b_;
}

double AffineMapLeastSquaresLoss::value(const Vector& x) const {
  require_size(x, dimension(), "AffineMapLeastSquaresLoss::value");
  if (b_.size() == 0) return 0.0;
  return (measurement_matrix() * x - b_).squaredNorm();
}

Vector AffineMapLeastSquaresLoss::gradient(const Vector& x) const {
  require_size(x, dimension(), "AffineMapLeastSquaresLoss::gradient");
  if (b_.size() == 0) return Vector::Zero(dimension());
  return 2.0 * (measurement_matrix().transpose() * (measurement_matrix() * x - b_));
}

Vector AffineMapLeastSquaresLoss::prox(const Vector& z, double gamma) const {
  require_size(z, dimension(), "AffineMapLeastSquaresLoss::prox");
  if (b_.size() == 0) {
    if (!(gamma > 0.0)) throw InputError("prox: gamma must be positive");
    return z;
  }
  return cache_.get(gamma)->solve(z + 2.0 * gamma * Mtb_);
}

FactorAnalysisLoss::FactorAnalysisLoss(Matrix Sigma, FaProxOptions options)
    : Sigma_(std::move(Sigma)), p_(Sigma_.rows()), options_(options) {
  if (Sigma_.rows() != Sigma_.cols() || p_ < 1) throw InputError("FactorAnalysisLoss: Sigma must be square");
}

double FactorAnalysisLoss::value(const Vector& x) const {
  require_size(x, dimension(), "FactorAnalysisLoss::value");
  const Matrix R = Sigma_ - fa_matrix_block(x, p_) - Matrix(fa_diagonal_block(x, p_).asDiagonal());
  return R.squaredNorm();
}

Vector FactorAnalysisLoss::gradient(const Vector& x) const {
  require_size(x, dimension(), "FactorAnalysisLoss::gradient");
  const Matrix R = Sigma_ - fa_matrix_block(x, p_) - Matrix(fa_diagonal_block(x, p_).asDiagonal());
  return fa_join(-2.0 * R, -2.0 * R.diagonal());
}

Vector FactorAnalysisLoss::prox(const Vector& z, double gamma) const {
  require_size(z, dimension(), "FactorAnalysisLoss::prox");
  const Matrix X = fa_matrix_block(z, p_);
  const FaPoint out = prox_fa_loss(Sigma_, gamma, 0.5 * (X + X.transpose()), fa_diagonal_block(z, p_), options_);
  return fa_join(out.X, out.d);
}

SmoothedLoss::SmoothedLoss(SmoothedFunction fun, Eigen::Index dimension) : fun_(std::move(fun)), n_(dimension) {
  if (!fun_.base) throw InputError("SmoothedLoss: base function required");
  if (!(fun_.nu > 0.0)) throw InputError("SmoothedLoss: nu must be positive");
  if (!(fun_.beta_inner >= 0.0)) throw InputError("SmoothedLoss: beta_inner must be nonnegative");
}

CallableLoss::CallableLoss(Eigen::Index dimension, Value value, Gradient gradient, Prox prox)
    : n_(dimension), value_(std::move(value)), gradient_(std::move(gradient)), prox_(std::move(prox)) {
  if (!value_ || !gradient_ || !prox_) throw InputError("CallableLoss: value, gradient and prox required");
}

}  // namespace nexos

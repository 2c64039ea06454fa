#include "nexos/problems.hpp"

#include "nexos/losses.hpp"
#include "nexos/random.hpp"
#include "nexos/sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nexos {

ProblemInstance build_sparse_regression(Matrix A, Vector b, Eigen::Index k, double bound) {
  if (A.rows() != b.size()) throw InputError("build_sparse_regression: rows(A) must equal dim(b)");
  if (k < 1 || k > A.cols()) throw InputError("build_sparse_regression: k must lie in [1, cols(A)]");
  const Eigen::Index n = A.cols();
  ProblemInstance p;
  p.set = std::make_shared<SparseBoxSet>(n, k, bound);
  p.loss = std::make_shared<LeastSquaresLoss>(std::move(A), std::move(b));
  p.family = Family::SR;
  p.shape = {n, 1};
  p.validate();
  return p;
}

ProblemInstance build_rank_minimization(const std::vector<Matrix>& A_mats, Vector b, Shape shape, Eigen::Index r,
                                        double bound) {
  ProblemInstance p;
  p.set = std::make_shared<RankSpectralSet>(shape, r, bound, Family::RM);
  p.loss = std::make_shared<AffineMapLeastSquaresLoss>(shape, A_mats, std::move(b));
  p.family = Family::RM;
  p.shape = shape;
  p.validate();
  return p;
}

double matrix_completion_bound(const std::vector<Observation>& obs, Shape shape) {
  validate_observations(obs, shape);
  if (obs.empty()) throw InputError("matrix_completion_bound: no observed entries");
  double fill = 0.0;
  double observed_sq = 0.0;
  for (const auto& o : obs) {
    fill = std::max(fill, std::abs(o.value));
    observed_sq += o.value * o.value;
  }
  const double missing = static_cast<double>(shape.size()) - static_cast<double>(obs.size());
  return std::sqrt(observed_sq + missing * fill * fill);
}

ProblemInstance build_matrix_completion(std::vector<Observation> obs, Shape shape, Eigen::Index r,
                                        std::optional<double> bound) {
  const double gamma_bound = bound ? *bound : matrix_completion_bound(obs, shape);
  ProblemInstance p;
  p.set = std::make_shared<RankSpectralSet>(shape, r, gamma_bound, Family::MC);
  p.loss = std::make_shared<MaskedLeastSquaresLoss>(shape, std::move(obs));
  p.family = Family::MC;
  p.shape = shape;
  p.validate();
  return p;
}

ProblemInstance build_factor_analysis(Matrix Sigma, Eigen::Index r, double bound) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() < 1) throw InputError("build_factor_analysis: Sigma must be square");
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw InputError("build_factor_analysis: Sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) throw InputError("build_factor_analysis: Sigma must be PSD");
  const Eigen::Index p_order = Sigma.rows();
  ProblemInstance p;
  p.set = std::make_shared<FactorAnalysisSet>(p_order, r, bound);
  p.loss = std::make_shared<FactorAnalysisLoss>(std::move(Sigma));
  p.family = Family::FA;
  p.shape = {p_order * p_order + p_order, 1};
  p.validate();
  return p;
}

double snr_noise_variance(double signal_norm_squared, Eigen::Index m) {
  return signal_norm_squared / (400.0 / static_cast<double>(m));
}

Eigen::Index round_half_even(double x) { return static_cast<Eigen::Index>(std::nearbyint(x)); }

SrInstance generate_sr_instance(Eigen::Index m, std::uint64_t seed) {
  if (m < 5) throw InputError("generate_sr_instance: m must be at least 5");
  Rng rng(seed);
  SrInstance inst;
  const Eigen::Index d = 2 * m;
  inst.A = rng.normal_matrix(m, d);
  inst.k = round_half_even(static_cast<double>(m) / 5.0);

  // Uniform support of size k via a partial Fisher-Yates shuffle.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < inst.k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  inst.x_true = Vector::Zero(d);
  for (Eigen::Index i = 0; i < inst.k; ++i) inst.x_true(idx[static_cast<std::size_t>(i)]) = rng.uniform(-1.0, 1.0);

  const Vector signal = inst.A * inst.x_true;
  inst.sigma2 = snr_noise_variance(signal.squaredNorm(), m);
  inst.b = signal + std::sqrt(inst.sigma2) * rng.normal_vector(m);
  return inst;
}

double rm_default_bound(Eigen::Index rows, Eigen::Index cols) {
  return 2.0 * (std::sqrt(static_cast<double>(rows)) + std::sqrt(static_cast<double>(cols)));
}

RmInstance generate_rm_instance(Eigen::Index m, std::uint64_t seed, double bound, const RmOptions& options) {
  if (m < 10) throw InputError("generate_rm_instance: m must be at least 10");
  if (!(bound > 0.0)) throw InputError("generate_rm_instance: bound must be positive");
  const Eigen::Index d = options.cols > 0 ? options.cols : 2 * m;
  const Eigen::Index r = options.rank > 0 ? options.rank : round_half_even(static_cast<double>(m) / 10.0);
  const Eigen::Index k = options.measurements > 0 ? options.measurements : (m * d) / 2;
  if (r > std::min(m, d)) throw InputError("generate_rm_instance: rank exceeds min(m, d)");

  Rng rng(seed);
  RmInstance inst;
  inst.rank = r;
  const Matrix G = rng.normal_matrix(m, d);
  Eigen::BDCSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sigma = svd.singularValues().head(r);
  for (Eigen::Index i = 0; i < r; ++i)
    if (sigma(i) > bound) sigma(i) = 0.0;
  inst.X_true = svd.matrixU().leftCols(r) * sigma.asDiagonal() * svd.matrixV().leftCols(r).transpose();

  inst.A_mats.reserve(static_cast<std::size_t>(k));
  Vector signal(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    inst.A_mats.push_back(rng.normal_matrix(m, d));
    signal(i) = (inst.A_mats.back().array() * inst.X_true.array()).sum();
  }
  inst.sigma2 = snr_noise_variance(signal.squaredNorm(), m);
  inst.b = signal + std::sqrt(inst.sigma2) * rng.normal_vector(k);
  return inst;
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double metric_support_recovery(const Vector& x, const Vector& x_true) {
  require_size(x, x_true.size(), "metric_support_recovery");
  if (x.size() == 0) throw InputError("metric_support_recovery: empty vectors");
  Eigen::Index matches = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) matches += sign_of(x(i)) == sign_of(x_true(i));
  return 100.0 * static_cast<double>(matches) / static_cast<double>(x.size());
}

double metric_rms(const Vector& pred, const Vector& actual) {
  require_size(pred, actual.size(), "metric_rms");
  if (pred.size() == 0) throw InputError("metric_rms: empty vectors");
  return std::sqrt((pred - actual).squaredNorm() / static_cast<double>(pred.size()));
}

double metric_explained_variance(const Matrix& X, const Vector& d, const Matrix& Sigma, Eigen::Index r) {
  const Eigen::Index p = Sigma.rows();
  if (Sigma.cols() != p || X.rows() != p || X.cols() != p || d.size() != p)
    throw InputError("metric_explained_variance: dimension mismatch");
  if (r < 1 || r > p) throw InputError("metric_explained_variance: r must lie in [1, p]");
  const double denom = Eigen::BDCSVD<Matrix>(Sigma - Matrix(d.asDiagonal())).singularValues().sum();
  if (!(denom > 0.0)) throw InputError("metric_explained_variance: Sigma - D is zero");
  return Eigen::BDCSVD<Matrix>(X).singularValues().head(r).sum() / denom;
}

std::vector<Observation> standardize_columns(const std::vector<Observation>& obs, Shape shape) {
  validate_observations(obs, shape);
  const auto cols = static_cast<std::size_t>(shape.cols);
  std::vector<double> sum(cols, 0.0), sum_sq(cols, 0.0);
  std::vector<int> count(cols, 0);
  for (const auto& o : obs) {
    const auto j = static_cast<std::size_t>(o.col);
    sum[j] += o.value;
    ++count[j];
  }
  std::vector<double> mean(cols, 0.0), scale(cols, 1.0);
  for (std::size_t j = 0; j < cols; ++j)
    if (count[j] > 0) mean[j] = sum[j] / count[j];
  for (const auto& o : obs) {
    const auto j = static_cast<std::size_t>(o.col);
    sum_sq[j] += (o.value - mean[j]) * (o.value - mean[j]);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (count[j] < 2) continue;
    const double sd = std::sqrt(sum_sq[j] / (count[j] - 1));
    if (sd > 0.0) scale[j] = sd;
  }
  std::vector<Observation> out = obs;
  for (auto& o : out) {
    const auto j = static_cast<std::size_t>(o.col);
    o.value = (o.value - mean[j]) / scale[j];
  }
  return out;
}

}  // namespace nexos

#include "nexos/core.hpp"

#include <cmath>

namespace nexos {

const char* to_string(Family family) {
  switch (family) {
    case Family::SR: return "SR";
    case Family::RM: return "RM";
    case Family::MC: return "MC";
    case Family::FA: return "FA";
    case Family::Custom: return "Custom";
  }
  return "Custom";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MuFloorReached: return "MuFloorReached";
    case SolveStatus::InnerBudgetExhausted: return "InnerBudgetExhausted";
  }
  return "MuFloorReached";
}

PenalizedIndicator::PenalizedIndicator(std::shared_ptr<const ProjectableSet> set, double mu, double beta)
    : set_(std::move(set)), mu_(mu), beta_(beta) {
  if (!set_) throw InputError("PenalizedIndicator: null set");
  if (!(mu > 0.0)) throw InputError("PenalizedIndicator: mu must be positive");
  if (!(beta >= 0.0)) throw InputError("PenalizedIndicator: beta must be nonnegative");
}

double PenalizedIndicator::envelope(const Vector& x) const {
  require_size(x, set_->dimension(), "PenalizedIndicator");
  const double d = set_->distance(x);
  return d * d / (2.0 * mu_);
}

double PenalizedIndicator::value(const Vector& x) const {
  return envelope(x) + 0.5 * beta_ * x.squaredNorm();
}

Vector PenalizedIndicator::gradient(const Vector& x) const {
  require_size(x, set_->dimension(), "PenalizedIndicator");
  return beta_ * x + (x - set_->project(x)) / mu_;
}

void SolverSettings::validate() const {
  if (!(beta >= 0.0)) throw InputError("settings: beta must be nonnegative");
  if (!(mu_init > 0.0) || !(mu_min > 0.0)) throw InputError("settings: mu_init and mu_min must be positive");
  if (!(mu_min < mu_init)) throw InputError("settings: mu_min must be below mu_init");
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("settings: rho must lie in (0, 1)");
  if (!(gamma > 0.0)) throw InputError("settings: gamma must be positive");
  if (!(eps_fixed_point > 0.0) || !(delta_stop > 0.0)) throw InputError("settings: tolerances must be positive");
  if (max_inner_iters < 1 || max_outer_stages < 1) throw InputError("settings: iteration budgets must be positive");
}

Vector SolverSettings::initial_point(Eigen::Index dimension) const {
  if (z_init.size() == 0) return Vector::Zero(dimension);
  require_size(z_init, dimension, "settings.z_init");
  return z_init;
}

double objective_original(const SmoothLoss& loss, double beta, const Vector& x, const ProjectableSet& set) {
  require_size(x, loss.dimension(), "objective_original");
  require_size(x, set.dimension(), "objective_original");
  if (!set.contains(x)) return kInfinity;
  return loss.value(x) + 0.5 * beta * x.squaredNorm();
}

double objective_penalized(const SmoothLoss& loss, const PenalizedIndicator& pen, const Vector& x) {
  require_size(x, loss.dimension(), "objective_penalized");
  return loss.value(x) + pen.value(x);
}

double stationarity_residual(const SmoothLoss& loss, const PenalizedIndicator& pen, const Vector& x) {
  require_size(x, loss.dimension(), "stationarity_residual");
  return (loss.gradient(x) + pen.gradient(x)).norm();
}

}  // namespace nexos

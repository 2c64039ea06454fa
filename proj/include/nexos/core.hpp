#pragma once

#include "nexos/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nexos {

/// A strongly convex, smooth loss f together with its proximal operator.
///
/// Implementations are immutable after construction; any cache (for example a
/// factorization keyed on the proximal parameter) must be safe to fill from
/// concurrent callers.
class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;

  virtual Family family() const = 0;
  virtual Eigen::Index dimension() const = 0;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  /// argmin_y f(y) + (1/(2 gamma)) ||y - z||^2.
  virtual Vector prox(const Vector& z, double gamma) const = 0;

  /// Optional metadata; never estimated and never used by the solver.
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }
  virtual std::optional<double> smoothness() const { return std::nullopt; }
};

/// A closed (generally nonconvex) set with a single-valued projection rule.
class ProjectableSet {
 public:
  virtual ~ProjectableSet() = default;

  virtual Family family() const = 0;
  virtual Eigen::Index dimension() const = 0;

  virtual Vector project(const Vector& x) const = 0;
  virtual bool contains(const Vector& x, double tol = 1e-10) const = 0;

  virtual double distance(const Vector& x) const { return (x - project(x)).norm(); }
};

/// mu-envelope of the indicator plus the Tikhonov term:
/// d^2(x) / (2 mu) + (beta / 2) ||x||^2.
class PenalizedIndicator {
 public:
  PenalizedIndicator(std::shared_ptr<const ProjectableSet> set, double mu, double beta);

  const ProjectableSet& set() const { return *set_; }
  double mu() const { return mu_; }
  double beta() const { return beta_; }

  double value(const Vector& x) const;
  double envelope(const Vector& x) const;
  Vector gradient(const Vector& x) const;

 private:
  std::shared_ptr<const ProjectableSet> set_;
  double mu_;
  double beta_;
};

struct SolverSettings {
  double beta = 1e-8;
  double mu_init = 2.0;
  double mu_min = 1e-8;
  double rho = 0.5;
  double gamma = 1e-3;
  double eps_fixed_point = 1e-4;
  double delta_stop = 1e-6;
  int max_inner_iters = 1000;
  int max_outer_stages = 100;
  /// Empty means the zero vector of the problem's dimension.
  Vector z_init;
  /// Abort with InnerBudgetExhausted when an inner solve misses eps.
  bool strict_inner = false;
  /// Keep the per-iteration gap trace in every StageLog.
  bool record_trace = false;

  /// Throws InputError on invalid combinations.
  void validate() const;
  Vector initial_point(Eigen::Index dimension) const;
};

enum class SolveStatus { Converged, MuFloorReached, InnerBudgetExhausted };

const char* to_string(SolveStatus status);

struct StageLog {
  double mu = 0.0;
  int iterations = 0;
  double final_gap = 0.0;
  double stop_gap = 0.0;
  bool inner_converged = false;
  /// ||grad f(x) + beta x + (x - Pi x) / mu|| at the stage's final x.
  double stationarity = 0.0;
  std::vector<double> residual_trace;
};

struct SolveResult {
  Vector x;
  Vector y;
  Vector z;
  Vector feasible_point;
  double objective_feasible = kInfinity;
  double penalized_objective = kInfinity;
  SolveStatus status = SolveStatus::MuFloorReached;
  std::vector<StageLog> stages;
  double wall_time_s = 0.0;
};

/// f(x) + (beta/2)||x||^2 inside the set, kInfinity outside.
double objective_original(const SmoothLoss& loss, double beta, const Vector& x, const ProjectableSet& set);

/// f(x) + (beta/2)||x||^2 + d^2(x) / (2 mu). Always finite.
double objective_penalized(const SmoothLoss& loss, const PenalizedIndicator& pen, const Vector& x);

/// ||grad f(x) + beta x + (x - Pi(x)) / mu||.
double stationarity_residual(const SmoothLoss& loss, const PenalizedIndicator& pen, const Vector& x);

}  // namespace nexos

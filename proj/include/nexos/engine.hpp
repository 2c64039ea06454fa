#pragma once

#include "nexos/core.hpp"
#include "nexos/operators.hpp"
#include "nexos/problem_instance.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nexos {

/// Iterates of the inner Douglas-Rachford loop after n steps.
struct IterationState {
  Vector x;
  Vector y;
  Vector z;
  int n = 0;
  double gap = kInfinity;  // ||x - y||
};

/// One inner iteration, emitted to a TraceSink.
struct TraceEvent {
  int stage_index = 0;
  double mu = 0.0;
  int iter = 0;
  double fixed_point_gap = 0.0;
};

using TraceSink = std::function<void(const TraceEvent&)>;

/// x+ = prox_{gamma f}(z); y~ = kappa (2 x+ - z); y+ = theta y~ + (1 - theta) Pi(y~);
/// z+ = z + y+ - x+.
IterationState drs_step(const SmoothLoss& loss, const ProjectableSet& set, const DrsConstants& consts, double gamma,
                        const Vector& z);

struct InnerResult {
  IterationState state;
  bool converged = false;
  std::vector<double> gap_trace;
};

/// Runs drs_step from z0 until the fixed-point gap drops to eps_fixed_point or
/// max_inner_iters steps have been taken. Always takes at least one step.
InnerResult solve_inner(const SmoothLoss& loss, const ProjectableSet& set, const SolverSettings& settings, double mu,
                        const Vector& z0, const TraceSink& sink = {}, int stage_index = 0);

/// Penalty continuation: mu_1 = mu_init, mu_{m+1} = rho mu_m, each stage
/// warm-started at the previous stage's z.
SolveResult solve(const ProblemInstance& problem, const SolverSettings& settings, const TraceSink& sink = {});

struct MultiStartResult {
  SolveResult best;
  std::size_t best_index = 0;
  std::vector<SolveResult> all;
  /// Initial z of every start.
  std::vector<Vector> starts;
};

/// Start 0 uses settings.z_init; starts 1.. are drawn uniformly from
/// [-bound, bound]^n with Rng(seed). Runs may execute on up to `threads`
/// workers (0 picks the hardware concurrency); the reduction is by feasible
/// objective, then start index, so the result is independent of scheduling.
MultiStartResult multi_start_solve(const ProblemInstance& problem, const SolverSettings& settings, int num_starts,
                                   std::uint64_t seed, double bound, unsigned threads = 1);

/// Fitted geometric decay factor of the last `window` entries of a positive
/// trace (least squares on the logs).
double estimate_tail_rate(std::span<const double> trace, std::size_t window = 30);

}  // namespace nexos

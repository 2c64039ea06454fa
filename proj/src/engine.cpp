#include "nexos/engine.hpp"

#include "nexos/random.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace nexos {

IterationState drs_step(const SmoothLoss& loss, const ProjectableSet& set, const DrsConstants& consts, double gamma,
                        const Vector& z) {
  IterationState s;
  s.x = loss.prox(z, gamma);
  const Vector y_tilde = consts.kappa * (2.0 * s.x - z);
  s.y = consts.theta * y_tilde + (1.0 - consts.theta) * set.project(y_tilde);
  s.z = z + s.y - s.x;
  s.gap = (s.x - s.y).norm();
  return s;
}

InnerResult solve_inner(const SmoothLoss& loss, const ProjectableSet& set, const SolverSettings& settings, double mu,
                        const Vector& z0, const TraceSink& sink, int stage_index) {
  if (!(mu > 0.0)) throw InputError("solve_inner: mu must be positive");
  require_size(z0, loss.dimension(), "solve_inner");
  const DrsConstants consts = DrsConstants::make(settings.gamma, mu, settings.beta);

  InnerResult out;
  out.gap_trace.reserve(static_cast<std::size_t>(std::min(settings.max_inner_iters, 4096)));
  Vector z = z0;
  for (int n = 1; n <= settings.max_inner_iters; ++n) {
    IterationState next = drs_step(loss, set, consts, settings.gamma, z);
    next.n = n;
    out.gap_trace.push_back(next.gap);
    if (sink) sink({stage_index, mu, n, next.gap});
    z = next.z;
    out.state = std::move(next);
    if (out.state.gap <= settings.eps_fixed_point) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SolveResult solve(const ProblemInstance& problem, const SolverSettings& settings, const TraceSink& sink) {
  problem.validate();
  settings.validate();
  const auto start = std::chrono::steady_clock::now();
  const SmoothLoss& loss = *problem.loss;
  const ProjectableSet& set = *problem.set;
  const double beta = settings.beta;

  SolveResult result;
  result.status = SolveStatus::MuFloorReached;
  Vector z = settings.initial_point(problem.dimension());
  double mu = settings.mu_init;

  for (int stage = 0; stage < settings.max_outer_stages; ++stage) {
    if (mu < settings.mu_min) break;

    InnerResult inner = solve_inner(loss, set, settings, mu, z, sink, stage);
    const PenalizedIndicator pen(problem.set, mu, beta);
    const Vector& x = inner.state.x;
    Vector projected = set.project(x);

    const double feasible = loss.value(projected) + 0.5 * beta * projected.squaredNorm();
    const double penalized = objective_penalized(loss, pen, x);

    StageLog log;
    log.mu = mu;
    log.iterations = inner.state.n;
    log.final_gap = inner.state.gap;
    log.stop_gap = std::abs(feasible - penalized);
    log.inner_converged = inner.converged;
    log.stationarity = stationarity_residual(loss, pen, x);
    if (settings.record_trace) log.residual_trace = std::move(inner.gap_trace);
    result.stages.push_back(std::move(log));

    result.x = inner.state.x;
    result.y = inner.state.y;
    result.z = inner.state.z;
    result.feasible_point = std::move(projected);
    result.objective_feasible = feasible;
    result.penalized_objective = penalized;
    z = inner.state.z;

    const StageLog& last = result.stages.back();
    if (!last.inner_converged && settings.strict_inner) {
      result.status = SolveStatus::InnerBudgetExhausted;
      break;
    }
    if (last.inner_converged && last.stop_gap <= settings.delta_stop) {
      result.status = SolveStatus::Converged;
      break;
    }
    mu *= settings.rho;
  }

  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

MultiStartResult multi_start_solve(const ProblemInstance& problem, const SolverSettings& settings, int num_starts,
                                   std::uint64_t seed, double bound, unsigned threads) {
  if (num_starts < 1) throw InputError("multi_start_solve: num_starts must be at least 1");
  if (!(bound > 0.0)) throw InputError("multi_start_solve: bound must be positive");
  problem.validate();
  settings.validate();

  const auto n = static_cast<std::size_t>(num_starts);
  std::vector<SolverSettings> per_start(n, settings);
  Rng rng(seed);
  for (std::size_t i = 1; i < n; ++i) per_start[i].z_init = rng.uniform_vector(problem.dimension(), -bound, bound);

  MultiStartResult out;
  out.all.resize(n);
  for (const auto& st : per_start) out.starts.push_back(st.initial_point(problem.dimension()));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));

  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.all[i] = solve(problem, per_start[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out.all[i] = solve(problem, per_start[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 1; i < n; ++i)
    if (out.all[i].objective_feasible < out.all[out.best_index].objective_feasible) out.best_index = i;
  out.best = out.all[out.best_index];
  return out;
}

double estimate_tail_rate(std::span<const double> trace, std::size_t window) {
  if (trace.size() < 10) throw InputError("estimate_tail_rate: at least 10 entries required");
  if (window < 2) throw InputError("estimate_tail_rate: window must be at least 2");
  for (double v : trace)
    if (!(v > 0.0)) throw InputError("estimate_tail_rate: trace entries must be positive");
  const std::size_t count = std::min(window, trace.size());
  const auto tail = trace.subspan(trace.size() - count);

  double sum_t = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    sum_t += static_cast<double>(i);
    sum_y += std::log(tail[i]);
  }
  const double mean_t = sum_t / static_cast<double>(count);
  const double mean_y = sum_y / static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dt = static_cast<double>(i) - mean_t;
    sxx += dt * dt;
    sxy += dt * (std::log(tail[i]) - mean_y);
  }
  return std::exp(sxy / sxx);
}

}  // namespace nexos

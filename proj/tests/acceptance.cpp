// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "cli.hpp"
#include "nexos/engine.hpp"
#include "nexos/operators.hpp"
#include "nexos/oracle.hpp"
#include "nexos/problems.hpp"
#include "nexos/random.hpp"
#include "nexos/sets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

using namespace nexos;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

int failed_criteria = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failed_criteria;
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const unsigned kThreads = cli::benchmark_threads(0);

// 1. Multi-start NExOS against the enumerated optimum.
void oracle_near_optimality() {
  const auto start = Clock::now();
  const SolverSettings defaults;
  int within_1pct = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const SrInstance inst = generate_sr_instance(10, seed);
    const ProblemInstance p = build_sparse_regression(inst.A, inst.b, 4, 1.0);
    const double found = multi_start_solve(p, defaults, 20, seed, 1.0, kThreads).best.objective_feasible;
    const double optimum = sr_global_opt(inst.A, inst.b, 4, 1.0, defaults.beta).optimum;
    const double ratio = found / optimum;
    if (ratio <= 1.01) ++within_1pct;
    worst = std::max(worst, ratio);
  }
  const double elapsed = seconds_since(start);
  report(1, within_1pct >= 40 && worst <= 1.05 && elapsed < 120.0,
         fmt("ratio<=1.01 on %d/50 (need 40), worst ratio %.4f (need <=1.05), %.1f s (need <120)", within_1pct, worst,
             elapsed));
}

// 2. Support recovery at m = 50.
void support_recovery() {
  const auto start = Clock::now();
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SrInstance inst = generate_sr_instance(50, seed);
    const ProblemInstance p = build_sparse_regression(inst.A, inst.b, inst.k, 1.0);
    mean += metric_support_recovery(solve(p, SolverSettings{}).feasible_point, inst.x_true) / 20.0;
  }
  const double elapsed = seconds_since(start);
  report(2, mean >= 90.0 && elapsed < 600.0,
         fmt("mean support recovery %.2f%% (need >=90), %.1f s (need <600)", mean, elapsed));
}

// 3. Low-rank recovery from noisy linear measurements.
void rank_recovery() {
  const Eigen::Index m = 20, d = 40;
  const double bound = rm_default_bound(m, d);
  double mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RmOptions opt;
    opt.rank = 2;
    const RmInstance inst = generate_rm_instance(m, seed, bound, opt);
    const ProblemInstance p = build_rank_minimization(inst.A_mats, inst.b, {m, d}, 2, bound);
    const Vector x = solve(p, SolverSettings{}).feasible_point;
    mean += (x - flatten(inst.X_true)).lpNorm<Eigen::Infinity>() / 10.0;
  }
  report(3, mean <= 0.02, fmt("mean max-entry error %.4g (need <=0.02)", mean));
}

// 4. Closed-form prox of the penalized indicator against the per-support minimum.
double penalized_1d_min(double a, double gamma, double mu, double beta, double bound) {
  // min_t (|t| - bound)_+^2 / (2 mu) + beta t^2 / 2 + (t - a)^2 / (2 gamma)
  double t = a / (1.0 + beta * gamma);
  if (std::abs(t) > bound) t = (a / gamma + std::copysign(bound, a) / mu) / (1.0 / mu + beta + 1.0 / gamma);
  const double e = std::max(std::abs(t) - bound, 0.0);
  return e * e / (2.0 * mu) + 0.5 * beta * t * t + (t - a) * (t - a) / (2.0 * gamma);
}

void prox_identity() {
  Rng rng(404);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double bound = rng.uniform(0.1, 4.0);
    const SparseBoxSet set(2, 1, bound);
    const Vector x = 3.0 * rng.normal_vector(2);
    const double gamma = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const double mu = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const double beta = rng.uniform(0.0, 2.0);
    const Vector y = prox_penalized_indicator(x, set, gamma, mu, beta);
    const double dist = set.distance(y);
    const double achieved = dist * dist / (2.0 * mu) + 0.5 * beta * y.squaredNorm() + (y - x).squaredNorm() / (2.0 * gamma);
    double minimum = kInfinity;
    for (int keep = 0; keep < 2; ++keep) {
      // Support {keep}: the other coordinate's distance to the set is |y|, i.e. bound 0.
      minimum = std::min(minimum, penalized_1d_min(x(keep), gamma, mu, beta, bound) +
                                      penalized_1d_min(x(1 - keep), gamma, mu, beta, 0.0));
    }
    const double err = std::abs(achieved - minimum);
    worst = std::max(worst, err);
    if (!(err <= 1e-6)) ++failures;
  }
  report(4, failures == 0, fmt("%d/1000 failures, worst difference %.3g (need <=1e-6)", failures, worst));
}

// Shared SR and MC runs for criteria 5-7.
std::vector<ProblemInstance> contract_instances() {
  std::vector<ProblemInstance> out;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SrInstance inst = generate_sr_instance(10, seed);
    out.push_back(build_sparse_regression(inst.A, inst.b, 4, 1.0));
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(1000 + seed);
    const Matrix Z = rng.normal_matrix(8, 2) * rng.normal_matrix(2, 8);
    std::vector<Observation> obs;
    for (Eigen::Index j = 0; j < 8; ++j)
      for (Eigen::Index i = 0; i < 8; ++i)
        if (rng.uniform() < 0.6) obs.push_back({i, j, Z(i, j)});
    out.push_back(build_matrix_completion(obs, {8, 8}, 2));
  }
  return out;
}

void inner_contract_and_schedule(const std::vector<ProblemInstance>& problems, const std::vector<SolveResult>& results) {
  const SolverSettings defaults;
  int converged_stages = 0, gap_violations = 0, stationarity_violations = 0;
  double worst_gap = 0.0, worst_stationarity = 0.0;
  int schedule_errors = 0, converged_runs = 0, stop_violations = 0;
  double worst_stop = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const SolveResult& r = results[i];
    for (std::size_t s = 0; s < r.stages.size(); ++s) {
      const StageLog& st = r.stages[s];
      if (st.mu != std::ldexp(2.0, -static_cast<int>(s))) ++schedule_errors;
      if (!st.inner_converged) continue;
      ++converged_stages;
      worst_gap = std::max(worst_gap, st.final_gap);
      worst_stationarity = std::max(worst_stationarity, st.stationarity);
      if (!(st.final_gap <= 1e-4)) ++gap_violations;
      if (!(st.stationarity <= 10.0 * defaults.eps_fixed_point)) ++stationarity_violations;
    }
    if (r.status == SolveStatus::Converged) {
      ++converged_runs;
      worst_stop = std::max(worst_stop, r.stages.back().stop_gap);
      if (!(r.stages.back().stop_gap <= 1e-6)) ++stop_violations;
    }
  }
  report(5, converged_stages > 0 && gap_violations == 0 && stationarity_violations == 0,
         fmt("%d converged stages; gap violations %d (worst %.3g, need <=1e-4); stationarity violations %d "
             "(worst %.3g, need <=1e-3)",
             converged_stages, gap_violations, worst_gap, stationarity_violations, worst_stationarity));
  report(6, schedule_errors == 0 && stop_violations == 0,
         fmt("%d mu mismatches; %d converged runs, worst stop gap %.3g (need <=1e-6)", schedule_errors, converged_runs,
             worst_stop));
}

void tail_rate(const std::vector<ProblemInstance>& problems, const std::vector<SolveResult>& results) {
  int checked = 0, violations = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (problems[i].family != Family::SR) continue;
    for (const StageLog& st : results[i].stages) {
      if (!st.inner_converged || st.residual_trace.size() < 30) continue;
      ++checked;
      const double rate = estimate_tail_rate(st.residual_trace);
      worst = std::max(worst, rate);
      if (!(rate < 1.0)) ++violations;
    }
  }
  report(7, checked > 0 && violations == 0,
         fmt("%d stages checked, %d with rate >= 1, worst rate %.4f", checked, violations, worst));
}

// 8. Structured prox operators against dense references.
void equivalence_oracles() {
  Rng rng(808);
  double mc_err = 0.0, rm_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Observation> obs;
    for (Eigen::Index j = 0; j < 5; ++j)
      for (Eigen::Index i = 0; i < 5; ++i)
        if (rng.uniform() < 0.5) obs.push_back({i, j, rng.normal()});
    Matrix S = Matrix::Zero(static_cast<Eigen::Index>(obs.size()), 25);
    Vector z(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t q = 0; q < obs.size(); ++q) {
      S(static_cast<Eigen::Index>(q), obs[q].row + 5 * obs[q].col) = 1.0;
      z(static_cast<Eigen::Index>(q)) = obs[q].value;
    }
    const Matrix V = rng.normal_matrix(5, 5);
    const double gamma = rng.uniform(0.01, 2.0);
    mc_err = std::max(mc_err, (flatten(prox_masked_least_squares(obs, gamma, V)) - prox_least_squares(S, z, gamma, flatten(V)))
                                  .lpNorm<Eigen::Infinity>());

    std::vector<Matrix> mats;
    for (int i = 0; i < 6; ++i) mats.push_back(rng.normal_matrix(3, 4));
    const Vector b = rng.normal_vector(6);
    const Matrix W = rng.normal_matrix(3, 4);
    rm_err = std::max(rm_err, (flatten(prox_affine_map_least_squares(mats, b, gamma, W)) -
                               prox_least_squares(stack_measurements(mats, {3, 4}), b, gamma, flatten(W)))
                                  .lpNorm<Eigen::Infinity>());
  }
  int rank_losses = 0;
  for (int t = 0; t < 5; ++t) {
    const Matrix X = 2.0 * rng.normal_matrix(3, 3);
    const Eigen::Index r = 1 + t % 2;
    const double bound = rng.uniform(0.5, 3.0);
    const RankOracleResult oracle = rank_projection_oracle(X, r, bound, 100000, static_cast<std::uint64_t>(t));
    if ((X - project_rank_spectral(X, r, bound)).norm() > oracle.best_random_distance + 1e-12) ++rank_losses;
  }
  report(8, mc_err <= 1e-10 && rm_err <= 1e-10 && rank_losses == 0,
         fmt("MC prox diff %.3g, RM prox diff %.3g (need <=1e-10); rank projection beaten in %d/5 cases", mc_err, rm_err,
             rank_losses));
}

// 9. Moreau-envelope wrapper.
void nonsmooth_wrapper() {
  Rng rng(909);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const SmoothedFunction fun{std::make_shared<L1Norm>(), rng.uniform(0.1, 2.0), rng.uniform(0.0, 1.0)};
    const Vector x = 2.0 * rng.normal_vector(4);
    Vector fd(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
      Vector p = x, q = x;
      p(i) += h;
      q(i) -= h;
      fd(i) = (fun.value(p) - fun.value(q)) / (2.0 * h);
    }
    const double rel = (smoothed_gradient(fun, x) - fd).norm() / std::max(1.0, fd.norm());
    worst = std::max(worst, rel);
    if (!(rel <= 1e-5)) ++failures;
  }
  const SmoothedFunction huber{std::make_shared<L1Norm>(), 1.0, 0.0};
  const double value = smoothed_prox(huber, 1.0, Vector::Constant(1, 3.0))(0);
  report(9, failures == 0 && std::abs(value - 2.0) <= 1e-9,
         fmt("gradient check failures %d/100 (worst relative %.3g); Huber example %.12f (need 2)", failures, worst, value));
}

// 10. Factor-analysis prox and explained variance.
void factor_analysis() {
  const FaPoint a = prox_fa_loss(Matrix::Constant(1, 1, 2.0), 1.0, Matrix::Constant(1, 1, 1.0), Vector::Constant(1, 0.5));
  const FaPoint b = prox_fa_loss(Matrix::Constant(1, 1, 1.0), 1.0, Matrix::Zero(1, 1), Vector::Constant(1, 2.0));
  const bool kkt = std::abs(a.X(0, 0) - 1.2) <= 1e-6 && std::abs(a.d(0) - 0.7) <= 1e-6 && std::abs(b.X(0, 0)) <= 1e-6 &&
                   std::abs(b.d(0) - 1.0) <= 1e-6;
  const Matrix X = Eigen::Vector2d(2, 1).asDiagonal();
  const Matrix Sigma = Eigen::Vector2d(3, 2).asDiagonal();
  const double ev1 = metric_explained_variance(X, Vector::Ones(2), Sigma, 1);
  const double ev2 = metric_explained_variance(X, Vector::Ones(2), Sigma, 2);
  const bool ev = std::abs(ev1 - 2.0 / 3.0) <= 1e-12 && std::abs(ev2 - 1.0) <= 1e-12;
  report(10, kkt && ev,
         fmt("KKT (%.7f, %.7f) and (%.7f, %.7f); explained variance %.6f and %.6f", a.X(0, 0), a.d(0), b.X(0, 0), b.d(0),
             ev1, ev2));
}

}  // namespace

int main() {
  std::printf("acceptance: %u worker thread(s)\n", kThreads);
  oracle_near_optimality();
  support_recovery();
  rank_recovery();
  prox_identity();

  const std::vector<ProblemInstance> problems = contract_instances();
  SolverSettings traced;
  traced.record_trace = true;
  std::vector<SolveResult> results;
  for (const ProblemInstance& p : problems) results.push_back(solve(p, traced));
  inner_contract_and_schedule(problems, results);
  tail_rate(problems, results);

  equivalence_oracles();
  nonsmooth_wrapper();
  factor_analysis();

  std::printf("acceptance: %d of 10 criteria failed\n", failed_criteria);
  return failed_criteria == 0 ? 0 : 1;
}

#include "doctest.h"

#include "nexos/engine.hpp"
#include "nexos/losses.hpp"
#include "nexos/problems.hpp"
#include "nexos/random.hpp"
#include "nexos/sets.hpp"

#include <cmath>
#include <memory>
#include <vector>

using namespace nexos;

namespace {

std::shared_ptr<const SmoothLoss> shifted_square(double center) {
  return std::make_shared<LeastSquaresLoss>(Matrix::Ones(1, 1), Vector::Constant(1, center));
}

std::shared_ptr<const ProjectableSet> two_points() {
  return std::make_shared<FinitePointSet>(std::vector<Vector>{Vector::Zero(1), Vector::Constant(1, 4.0)});
}

ProblemInstance small_sr(std::uint64_t seed) {
  const SrInstance inst = generate_sr_instance(10, seed);
  return build_sparse_regression(inst.A, inst.b, 4, 1.0);
}

}  // namespace

TEST_CASE("drs_step hand-executed examples") {
  SUBCASE("two-point set with Tikhonov term") {
    const auto f = shifted_square(3.0);
    const auto set = two_points();
    const auto consts = DrsConstants::make(1.0, 1.0, 1.0);
    const IterationState s = drs_step(*f, *set, consts, 1.0, Vector::Constant(1, 1.0));
    CHECK(s.x(0) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK(s.y(0) == doctest::Approx(11.0 / 9.0).epsilon(1e-14));
    CHECK(s.z(0) == doctest::Approx(-1.0 / 9.0).epsilon(1e-14));
    CHECK(s.gap == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
  }
  SUBCASE("whole space reduces to classical DRS") {
    const auto f = shifted_square(0.0);
    EuclideanSpace space(1);
    const auto consts = DrsConstants::make(1.0, 1.0, 0.0);
    const IterationState s = drs_step(*f, space, consts, 1.0, Vector::Constant(1, 3.0));
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(s.y(0) == doctest::Approx(-1.0));
    CHECK(s.z(0) == doctest::Approx(1.0));
  }
  SUBCASE("z update is exact") {
    const ProblemInstance p = small_sr(3);
    Rng rng(1);
    const Vector z = rng.normal_vector(p.dimension());
    const auto consts = DrsConstants::make(1e-3, 0.5, 1e-8);
    const IterationState s = drs_step(*p.loss, *p.set, consts, 1e-3, z);
    CHECK(s.z == Vector(z + s.y - s.x));
  }
}

TEST_CASE("drs_step leaves a fixed point in place") {
  const auto f = shifted_square(3.0);
  const auto set = two_points();
  SolverSettings st;
  st.gamma = 0.1;
  st.beta = 1.0;
  st.eps_fixed_point = 1e-14;
  st.max_inner_iters = 10000;
  const InnerResult inner = solve_inner(*f, *set, st, 1.0, Vector::Constant(1, 1.0));
  REQUIRE(inner.converged);
  const IterationState again = drs_step(*f, *set, DrsConstants::make(0.1, 1.0, 1.0), 0.1, inner.state.z);
  CHECK(std::abs(again.z(0) - inner.state.z(0)) <= 1e-12);
}

TEST_CASE("solve_inner") {
  const auto f = shifted_square(3.0);
  const auto set = two_points();
  SolverSettings st;
  st.gamma = 0.1;
  st.beta = 1.0;

  SUBCASE("converges to a stationary point of the penalized problem") {
    const InnerResult r = solve_inner(*f, *set, st, 1.0, Vector::Constant(1, 1.0));
    CHECK(r.converged);
    CHECK(r.state.gap <= 1e-4);
    CHECK(r.gap_trace.size() == static_cast<std::size_t>(r.state.n));
    const PenalizedIndicator pen(set, 1.0, 1.0);
    CHECK(stationarity_residual(*f, pen, r.state.x) <= 1e-3);
    // Stationary points of (x - 3)^2 + d^2(x)/2 + x^2/2 are 1.5 (near 0) and 2.5 (near 4).
    CHECK(std::abs(r.state.x(0) - 1.5) <= 1e-3);
  }
  SUBCASE("with gamma = 1 the iteration settles into a two-cycle") {
    SolverSettings wide = st;
    wide.gamma = 1.0;
    const InnerResult r = solve_inner(*f, *set, wide, 1.0, Vector::Constant(1, 1.0));
    CHECK_FALSE(r.converged);
    CHECK(r.state.gap == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
    const std::size_t n = r.gap_trace.size();
    CHECK(r.gap_trace[n - 1] == doctest::Approx(r.gap_trace[n - 3]).epsilon(1e-12));
  }
  SUBCASE("an approximate fixed point exits after one step") {
    SolverSettings tight = st;
    tight.eps_fixed_point = 1e-13;
    tight.max_inner_iters = 100000;
    const Vector z = solve_inner(*f, *set, tight, 1.0, Vector::Constant(1, 1.0)).state.z;
    const InnerResult r = solve_inner(*f, *set, st, 1.0, z);
    CHECK(r.state.n == 1);
    CHECK(r.converged);
  }
  SUBCASE("gap trace decays geometrically") {
    SolverSettings tight = st;
    tight.eps_fixed_point = 1e-12;
    tight.max_inner_iters = 100000;
    const InnerResult r = solve_inner(*f, *set, tight, 1.0, Vector::Constant(1, 1.0));
    REQUIRE(r.gap_trace.size() >= 30);
    CHECK(estimate_tail_rate(r.gap_trace) < 1.0);
  }
  SUBCASE("budget exhaustion is reported, not thrown") {
    SolverSettings one = st;
    one.max_inner_iters = 1;
    one.eps_fixed_point = 1e-14;
    const InnerResult r = solve_inner(*f, *set, one, 1.0, Vector::Constant(1, 1.0));
    CHECK_FALSE(r.converged);
    CHECK(r.state.n == 1);
  }
  SUBCASE("sink receives one event per iteration") {
    std::vector<TraceEvent> events;
    const InnerResult r =
        solve_inner(*f, *set, st, 1.0, Vector::Constant(1, 1.0), [&](const TraceEvent& e) { events.push_back(e); }, 4);
    REQUIRE(events.size() == r.gap_trace.size());
    CHECK(events.front().iter == 1);
    CHECK(events.back().stage_index == 4);
    CHECK(events.back().fixed_point_gap == r.state.gap);
  }
  SUBCASE("invalid mu") { CHECK_THROWS_AS(solve_inner(*f, *set, st, 0.0, Vector::Zero(1)), InputError); }
}

TEST_CASE("solve: stage schedule is mu_init * rho^(m-1) exactly") {
  const ProblemInstance p = small_sr(4);
  const SolveResult r = solve(p, SolverSettings{});
  REQUIRE(r.stages.size() >= 3);
  double mu = 2.0;
  for (const StageLog& s : r.stages) {
    CHECK(s.mu == mu);
    mu *= 0.5;
  }
  CHECK(r.stages[0].mu == 2.0);
  CHECK(r.stages[1].mu == 1.0);
  CHECK(r.stages[2].mu == 0.5);
}

TEST_CASE("solve: warm starts chain the inner solves bit-for-bit") {
  const ProblemInstance p = small_sr(5);
  SolverSettings st;
  st.max_outer_stages = 6;
  const SolveResult r = solve(p, st);

  Vector z = Vector::Zero(p.dimension());
  double mu = st.mu_init;
  InnerResult inner;
  for (std::size_t m = 0; m < r.stages.size(); ++m) {
    inner = solve_inner(*p.loss, *p.set, st, mu, z);
    CHECK(inner.state.n == r.stages[m].iterations);
    CHECK(inner.state.gap == r.stages[m].final_gap);
    z = inner.state.z;
    mu *= st.rho;
  }
  CHECK(r.z == z);
  CHECK(r.x == inner.state.x);
}

TEST_CASE("solve: random SR instance yields a feasible point") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ProblemInstance p = small_sr(seed);
    const SolveResult r = solve(p, SolverSettings{});
    CHECK(p.set->contains(r.feasible_point));
    CHECK((r.feasible_point.array() != 0.0).count() <= 4);
    CHECK(r.feasible_point.lpNorm<Eigen::Infinity>() <= 1.0);
    CHECK(r.objective_feasible == doctest::Approx(objective_original(*p.loss, 1e-8, r.feasible_point, *p.set)));
    if (r.status == SolveStatus::Converged) {
      CHECK(r.stages.back().final_gap <= 1e-4);
      CHECK(r.stages.back().stop_gap <= 1e-6);
    }
  }
}

TEST_CASE("solve: ridge minimizer inside the set converges in one stage") {
  const Matrix A = Matrix::Identity(2, 2);
  const Vector b = Eigen::Vector2d(0.5, 0.0);
  const ProblemInstance p = build_sparse_regression(A, b, 1, 1.0);
  SolverSettings st;
  // Minimizer of ||x - b||^2 + (beta/2)||x||^2; a fixed point of the inner map since Pi is the identity nearby.
  st.z_init = b / (1.0 + 0.5 * st.beta);
  const SolveResult r = solve(p, st);
  CHECK(r.status == SolveStatus::Converged);
  CHECK(r.stages.size() == 1);
  CHECK(r.stages[0].stop_gap <= st.delta_stop);
}

TEST_CASE("solve: full-cardinality sparse regression reduces to ridge regression") {
  Rng rng(41);
  const Matrix A = rng.normal_matrix(8, 4);
  const Vector b = rng.normal_vector(8);
  const ProblemInstance p = build_sparse_regression(A, b, 4, 1e6);
  SolverSettings st;
  st.gamma = 0.05;
  st.eps_fixed_point = 1e-10;
  st.max_inner_iters = 100000;
  const SolveResult r = solve(p, st);
  const Vector ridge =
      (2.0 * A.transpose() * A + st.beta * Matrix::Identity(4, 4)).ldlt().solve(2.0 * A.transpose() * b);
  CHECK(r.status == SolveStatus::Converged);
  CHECK((r.feasible_point - ridge).norm() <= 1e-6);
}

TEST_CASE("solve: termination statuses") {
  const ProblemInstance p = small_sr(6);
  SUBCASE("strict mode aborts on a missed inner tolerance") {
    SolverSettings st;
    st.strict_inner = true;
    st.max_inner_iters = 1;
    st.eps_fixed_point = 1e-14;
    const SolveResult r = solve(p, st);
    CHECK(r.status == SolveStatus::InnerBudgetExhausted);
    CHECK(r.stages.size() == 1);
  }
  SUBCASE("mu floor") {
    SolverSettings st;
    st.mu_min = 0.6;
    st.delta_stop = 1e-300;
    const SolveResult r = solve(p, st);
    CHECK(r.status == SolveStatus::MuFloorReached);
    CHECK(r.stages.size() == 2);
    CHECK(r.stages.back().mu == 1.0);
  }
  SUBCASE("trace sink sees every inner iteration") {
    SolverSettings st;
    st.record_trace = true;
    std::size_t events = 0;
    const SolveResult r = solve(p, st, [&](const TraceEvent&) { ++events; });
    std::size_t total = 0;
    for (const StageLog& s : r.stages) {
      total += static_cast<std::size_t>(s.iterations);
      CHECK(s.residual_trace.size() == static_cast<std::size_t>(s.iterations));
    }
    CHECK(events == total);
  }
}

TEST_CASE("multi_start_solve") {
  const ProblemInstance p = small_sr(7);
  const SolverSettings st;
  SUBCASE("one start equals solve") {
    const MultiStartResult ms = multi_start_solve(p, st, 1, 99, 1.0);
    const SolveResult single = solve(p, st);
    CHECK(ms.best.objective_feasible == single.objective_feasible);
    CHECK(ms.best.x == single.x);
    CHECK(ms.best_index == 0);
  }
  SUBCASE("deterministic across seeds and thread counts") {
    const MultiStartResult a = multi_start_solve(p, st, 6, 12, 1.0, 1);
    const MultiStartResult b = multi_start_solve(p, st, 6, 12, 1.0, 1);
    const MultiStartResult c = multi_start_solve(p, st, 6, 12, 1.0, 4);
    CHECK(a.best.objective_feasible == b.best.objective_feasible);
    CHECK(a.best.objective_feasible == c.best.objective_feasible);
    CHECK(a.best_index == c.best_index);
    for (std::size_t i = 0; i < a.all.size(); ++i) CHECK(a.all[i].x == c.all[i].x);
    for (const SolveResult& r : a.all) CHECK(a.best.objective_feasible <= r.objective_feasible);
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(multi_start_solve(p, st, 0, 1, 1.0), InputError);
    CHECK_THROWS_AS(multi_start_solve(p, st, 2, 1, 0.0), InputError);
  }
}

TEST_CASE("estimate_tail_rate") {
  std::vector<double> geometric, constant(20, 3.0);
  for (int n = 1; n <= 50; ++n) geometric.push_back(std::pow(0.5, n));
  CHECK(std::abs(estimate_tail_rate(geometric) - 0.5) <= 1e-9);
  CHECK(std::abs(estimate_tail_rate(constant) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(estimate_tail_rate(std::vector<double>(5, 1.0)), InputError);
  std::vector<double> bad(12, 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(estimate_tail_rate(bad), InputError);
}

TEST_CASE("DRS operator is locally nonexpansive near a converged stage") {
  const ProblemInstance p = small_sr(8);
  SolverSettings st;
  st.record_trace = true;
  const SolveResult r = solve(p, st);
  REQUIRE(r.stages.back().inner_converged);
  const double mu = r.stages.back().mu;
  const auto consts = DrsConstants::make(st.gamma, mu, st.beta);
  const double eta = 1e-3 * r.z.norm();
  Rng rng(9);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vector z1 = r.z + eta * rng.uniform_vector(p.dimension(), -1.0, 1.0) / std::sqrt(double(p.dimension()));
    const Vector z2 = r.z + eta * rng.uniform_vector(p.dimension(), -1.0, 1.0) / std::sqrt(double(p.dimension()));
    const Vector t1 = drs_step(*p.loss, *p.set, consts, st.gamma, z1).z;
    const Vector t2 = drs_step(*p.loss, *p.set, consts, st.gamma, z2).z;
    worst = std::max(worst, (t1 - t2).norm() / (z1 - z2).norm());
  }
  CHECK(worst <= 1.0 + 1e-6);
}

#include "cli.hpp"

#include "nexos/engine.hpp"
#include "nexos/io.hpp"
#include "nexos/losses.hpp"
#include "nexos/operators.hpp"
#include "nexos/oracle.hpp"
#include "nexos/problems.hpp"
#include "nexos/random.hpp"
#include "nexos/sets.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <thread>
#include <vector>

namespace nexos::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// RunConfig <-> JSON

bool RunConfig::operator==(const RunConfig& o) const { return to_json(*this) == to_json(o); }

namespace {

json settings_to_json(const SolverSettings& s) {
  return {{"beta", s.beta},
          {"mu_init", s.mu_init},
          {"mu_min", s.mu_min},
          {"rho", s.rho},
          {"gamma", s.gamma},
          {"eps_fixed_point", s.eps_fixed_point},
          {"delta_stop", s.delta_stop},
          {"max_inner_iters", s.max_inner_iters},
          {"max_outer_stages", s.max_outer_stages},
          {"z_init", std::vector<double>(s.z_init.data(), s.z_init.data() + s.z_init.size())},
          {"strict_inner", s.strict_inner}};
}

template <class T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw InputError(std::string("unknown key '") + key + "' in " + where);
  }
}

SolverSettings settings_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config: settings must be an object");
  reject_unknown(j,
                 {"beta", "mu_init", "mu_min", "rho", "gamma", "eps_fixed_point", "delta_stop", "max_inner_iters",
                  "max_outer_stages", "z_init", "strict_inner"},
                 "settings");
  SolverSettings s;
  read_if(j, "beta", s.beta);
  read_if(j, "mu_init", s.mu_init);
  read_if(j, "mu_min", s.mu_min);
  read_if(j, "rho", s.rho);
  read_if(j, "gamma", s.gamma);
  read_if(j, "eps_fixed_point", s.eps_fixed_point);
  read_if(j, "delta_stop", s.delta_stop);
  read_if(j, "max_inner_iters", s.max_inner_iters);
  read_if(j, "max_outer_stages", s.max_outer_stages);
  read_if(j, "strict_inner", s.strict_inner);
  if (j.contains("z_init")) {
    const auto z = j.at("z_init").get<std::vector<double>>();
    s.z_init = Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size()));
  }
  return s;
}

}  // namespace

json to_json(const RunConfig& c) {
  return {{"family", c.family},
          {"A_path", c.A_path},
          {"b_path", c.b_path},
          {"observations_path", c.observations_path},
          {"sigma_path", c.sigma_path},
          {"rows", c.rows},
          {"cols", c.cols},
          {"m", c.m},
          {"seed", c.seed},
          {"k", c.k},
          {"rank", c.rank},
          {"bound", c.bound ? json(*c.bound) : json(nullptr)},
          {"settings", settings_to_json(c.settings)},
          {"num_starts", c.num_starts},
          {"start_seed", c.start_seed},
          {"output_dir", c.output_dir},
          {"trace", c.trace}};
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config: top level must be an object");
  reject_unknown(j,
                 {"family", "A_path", "b_path", "observations_path", "sigma_path", "rows", "cols", "m", "seed", "k",
                  "rank", "bound", "settings", "num_starts", "start_seed", "output_dir", "trace"},
                 "config");
  RunConfig c;
  try {
    read_if(j, "family", c.family);
    read_if(j, "A_path", c.A_path);
    read_if(j, "b_path", c.b_path);
    read_if(j, "observations_path", c.observations_path);
    read_if(j, "sigma_path", c.sigma_path);
    read_if(j, "rows", c.rows);
    read_if(j, "cols", c.cols);
    read_if(j, "m", c.m);
    read_if(j, "seed", c.seed);
    read_if(j, "k", c.k);
    read_if(j, "rank", c.rank);
    if (j.contains("bound") && !j.at("bound").is_null()) c.bound = j.at("bound").get<double>();
    if (j.contains("settings")) c.settings = settings_from_json(j.at("settings"));
    read_if(j, "num_starts", c.num_starts);
    read_if(j, "start_seed", c.start_seed);
    read_if(j, "output_dir", c.output_dir);
    read_if(j, "trace", c.trace);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError("malformed config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Problem construction

namespace {

std::vector<Matrix> unstack_measurements(const Matrix& stacked, Shape shape) {
  if (stacked.cols() != shape.size())
    throw InputError("rm: measurement matrix needs rows*cols = " + std::to_string(shape.size()) + " columns");
  std::vector<Matrix> mats;
  mats.reserve(static_cast<std::size_t>(stacked.rows()));
  for (Eigen::Index i = 0; i < stacked.rows(); ++i) {
    const Vector row = stacked.row(i).transpose();
    mats.push_back(as_matrix(row, shape));
  }
  return mats;
}

Shape observation_shape(const RunConfig& c, const std::vector<Observation>& obs) {
  if (c.rows > 0 && c.cols > 0) return {c.rows, c.cols};
  Shape s{0, 0};
  for (const auto& o : obs) {
    s.rows = std::max(s.rows, o.row + 1);
    s.cols = std::max(s.cols, o.col + 1);
  }
  return s;
}

}  // namespace

ProblemInstance build_problem(const RunConfig& c) {
  if (c.family == "sr") {
    if (!c.A_path.empty() || !c.b_path.empty()) {
      if (c.A_path.empty() || c.b_path.empty()) throw InputError("sr: both A_path and b_path are required");
      if (c.k < 1) throw InputError("sr: k is required with file input");
      return build_sparse_regression(io::read_matrix(c.A_path), io::read_vector(c.b_path), c.k, c.bound.value_or(1.0));
    }
    SrInstance inst = generate_sr_instance(c.m, c.seed);
    ProblemInstance p = build_sparse_regression(inst.A, inst.b, c.k > 0 ? c.k : inst.k, c.bound.value_or(1.0));
    p.ground_truth = inst.x_true;
    return p;
  }
  if (c.family == "rm") {
    if (!c.A_path.empty() || !c.b_path.empty()) {
      if (c.A_path.empty() || c.b_path.empty()) throw InputError("rm: both A_path and b_path are required");
      if (c.rows < 1 || c.cols < 1 || c.rank < 1) throw InputError("rm: rows, cols and rank are required with file input");
      const Shape shape{c.rows, c.cols};
      return build_rank_minimization(unstack_measurements(io::read_matrix(c.A_path), shape), io::read_vector(c.b_path),
                                     shape, c.rank, c.bound.value_or(rm_default_bound(c.rows, c.cols)));
    }
    const Eigen::Index d = 2 * c.m;
    const double bound = c.bound.value_or(rm_default_bound(c.m, d));
    RmOptions opt;
    opt.rank = c.rank;
    RmInstance inst = generate_rm_instance(c.m, c.seed, bound, opt);
    ProblemInstance p = build_rank_minimization(inst.A_mats, inst.b, {c.m, d}, inst.rank, bound);
    p.ground_truth = flatten(inst.X_true);
    return p;
  }
  if (c.family == "mc") {
    if (c.observations_path.empty()) throw InputError("mc: observations_path is required");
    if (c.rank < 1) throw InputError("mc: rank is required");
    auto obs = io::read_observations(c.observations_path);
    const Shape shape = observation_shape(c, obs);
    return build_matrix_completion(std::move(obs), shape, c.rank, c.bound);
  }
  if (c.family == "fa") {
    if (c.sigma_path.empty()) throw InputError("fa: sigma_path is required");
    if (c.rank < 1) throw InputError("fa: rank is required");
    Matrix Sigma = io::read_matrix(c.sigma_path);
    const double bound =
        c.bound ? *c.bound : Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (Sigma + Sigma.transpose())).eigenvalues().cwiseAbs().maxCoeff();
    return build_factor_analysis(std::move(Sigma), c.rank, bound);
  }
  throw InputError("unknown family '" + c.family + "' (expected sr, rm, mc or fa)");
}

int exit_code(SolveStatus status) { return status == SolveStatus::Converged ? kExitConverged : kExitNotConverged; }

// ---------------------------------------------------------------------------
// solve

namespace {

double start_bound(const ProblemInstance& p, const RunConfig& c) {
  if (c.bound) return *c.bound;
  if (const auto* s = dynamic_cast<const SparseBoxSet*>(p.set.get())) return s->bound();
  if (const auto* s = dynamic_cast<const RankSpectralSet*>(p.set.get())) return s->bound();
  return 1.0;
}

void write_solution(const fs::path& path, const ProblemInstance& p, const Vector& x) {
  if (p.family == Family::RM || p.family == Family::MC)
    io::write_csv(path, as_matrix(x, p.shape));
  else
    io::write_csv(path, x);
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& log) {
  const ProblemInstance problem = build_problem(config);
  if (config.num_starts < 1) throw InputError("num_starts must be at least 1");
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);

  SolveResult result;
  SolverSettings chosen = config.settings;
  if (config.num_starts == 1) {
    result = solve(problem, config.settings);
  } else {
    auto ms = multi_start_solve(problem, config.settings, config.num_starts, config.start_seed,
                                start_bound(problem, config), benchmark_threads(0));
    chosen.z_init = ms.starts[ms.best_index];
    result = std::move(ms.best);
    log << "best of " << config.num_starts << " starts: index " << ms.best_index << '\n';
  }

  if (config.trace) {
    // Re-run the selected start with a sink; solves are deterministic, so the
    // trace belongs to exactly the reported result.
    std::ofstream trace(out_dir / "trace.csv");
    if (!trace) throw InputError("cannot write trace.csv in " + out_dir.string());
    trace << std::setprecision(std::numeric_limits<double>::max_digits10);
    trace << "stage_index,mu,iter,fixed_point_gap\n";
    solve(problem, chosen, [&](const TraceEvent& e) {
      trace << e.stage_index << ',' << e.mu << ',' << e.iter << ',' << e.fixed_point_gap << '\n';
    });
  }

  const fs::path x_path = out_dir / "x.csv";
  write_solution(x_path, problem, result.feasible_point);

  ordered_json j;
  j["status"] = to_string(result.status);
  j["objective_feasible"] = result.objective_feasible;
  j["objective_penalized"] = result.penalized_objective;
  j["wall_time_s"] = result.wall_time_s;
  j["stages"] = ordered_json::array();
  for (const StageLog& s : result.stages) {
    ordered_json stage;
    stage["mu"] = s.mu;
    stage["iterations"] = s.iterations;
    stage["final_gap"] = s.final_gap;
    stage["stop_gap"] = s.stop_gap;
    j["stages"].push_back(stage);
  }
  j["x_path"] = x_path.string();
  std::ofstream out(out_dir / "result.json");
  if (!out) throw InputError("cannot write result.json in " + out_dir.string());
  out << j.dump(2) << '\n';

  log << to_string(result.status) << ": objective " << std::setprecision(10) << result.objective_feasible << " after "
      << result.stages.size() << " stages (" << result.wall_time_s << " s)\n";
  return exit_code(result.status);
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const std::string& family, Eigen::Index m, std::uint64_t seed, const fs::path& out_dir,
                 std::ostream& log, std::optional<double> bound) {
  fs::create_directories(out_dir);
  if (family == "sr") {
    const SrInstance inst = generate_sr_instance(m, seed);
    io::write_matrix_market(out_dir / "A.mtx", inst.A);
    io::write_csv(out_dir / "b.csv", inst.b);
    io::write_csv(out_dir / "xtrue.csv", inst.x_true);
    log << "sr instance: A " << inst.A.rows() << "x" << inst.A.cols() << ", k = " << inst.k << '\n';
    return 0;
  }
  if (family == "rm") {
    const Eigen::Index d = 2 * m;
    const RmInstance inst = generate_rm_instance(m, seed, bound.value_or(rm_default_bound(m, d)));
    io::write_matrix_market(out_dir / "A.mtx", stack_measurements(inst.A_mats, {m, d}));
    io::write_csv(out_dir / "b.csv", inst.b);
    io::write_csv(out_dir / "Xtrue.csv", inst.X_true);
    log << "rm instance: X " << m << "x" << d << ", rank " << inst.rank << ", " << inst.A_mats.size()
        << " measurements\n";
    return 0;
  }
  throw InputError("generate: unknown family '" + family + "' (expected sr or rm)");
}

// ---------------------------------------------------------------------------
// benchmark

unsigned benchmark_threads(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NEXOS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

namespace {

/// Runs body(i) for i in [0, n) on up to `threads` workers; results are
/// stored by index so output order never depends on scheduling.
void parallel_for(int n, unsigned threads, const std::function<void(int)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1))));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Column {
  std::string name;
  std::vector<double> values;
};

void write_benchmark(const fs::path& dir, const std::string& suite, const std::vector<Column>& columns,
                     std::ostream& log) {
  fs::create_directories(dir);
  const std::size_t rows = columns.front().values.size();
  std::ofstream csv(dir / ("benchmark_" + suite + ".csv"));
  std::ofstream summary(dir / ("benchmark_" + suite + "_summary.csv"));
  if (!csv || !summary) throw InputError("cannot write benchmark output in " + dir.string());
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  summary << std::setprecision(std::numeric_limits<double>::max_digits10);

  csv << "trial";
  for (const auto& c : columns) csv << ',' << c.name;
  csv << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    csv << i;
    for (const auto& c : columns) csv << ',' << c.values[i];
    csv << '\n';
  }

  summary << "metric,mean,stderr\n";
  for (const auto& c : columns) {
    const double n = static_cast<double>(c.values.size());
    double mean = 0.0;
    for (double v : c.values) mean += v / n;
    double ss = 0.0;
    for (double v : c.values) ss += (v - mean) * (v - mean);
    const double se = c.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    summary << c.name << ',' << mean << ',' << se << '\n';
    log << std::setw(18) << std::left << c.name << " mean " << std::setprecision(6) << mean << "  stderr " << se << '\n';
  }
}

}  // namespace

int cmd_benchmark(const std::string& suite, const BenchmarkOptions& o, std::ostream& log) {
  if (o.trials < 1) throw InputError("benchmark: trials must be at least 1");
  const unsigned threads = benchmark_threads(o.threads);
  const auto n = static_cast<std::size_t>(o.trials);
  const SolverSettings defaults;

  if (suite == "sr-oracle") {
    // Desk-scale: m = 10, d = 20, k = 4, box 1, 20 random starts.
    const Eigen::Index m = o.m > 0 ? o.m : 10;
    std::vector<double> nexos_obj(n), oracle_obj(n), ratio(n);
    parallel_for(o.trials, threads, [&](int t) {
      const SrInstance inst = generate_sr_instance(m, o.seed + static_cast<std::uint64_t>(t));
      const ProblemInstance p = build_sparse_regression(inst.A, inst.b, 4, 1.0);
      const auto i = static_cast<std::size_t>(t);
      nexos_obj[i] = multi_start_solve(p, defaults, 20, o.seed + static_cast<std::uint64_t>(t), 1.0).best.objective_feasible;
      oracle_obj[i] = sr_global_opt(inst.A, inst.b, 4, 1.0, defaults.beta).optimum;
      ratio[i] = nexos_obj[i] / oracle_obj[i];
    });
    write_benchmark(o.out_dir, suite, {{"nexos_obj", nexos_obj}, {"oracle_obj", oracle_obj}, {"ratio", ratio}}, log);
    return 0;
  }
  if (suite == "support-recovery") {
    const Eigen::Index m = o.m > 0 ? o.m : 50;
    std::vector<double> recovery(n);
    parallel_for(o.trials, threads, [&](int t) {
      const SrInstance inst = generate_sr_instance(m, o.seed + static_cast<std::uint64_t>(t));
      const ProblemInstance p = build_sparse_regression(inst.A, inst.b, inst.k, 1.0);
      recovery[static_cast<std::size_t>(t)] = metric_support_recovery(solve(p, defaults).feasible_point, inst.x_true);
    });
    write_benchmark(o.out_dir, suite, {{"support_recovery", recovery}}, log);
    return 0;
  }
  if (suite == "rm-recovery") {
    const Eigen::Index m = o.m > 0 ? o.m : 20;
    const Eigen::Index d = 2 * m;
    const double bound = rm_default_bound(m, d);
    std::vector<double> max_err(n), rms(n);
    parallel_for(o.trials, threads, [&](int t) {
      RmOptions opt;
      opt.rank = std::max<Eigen::Index>(1, round_half_even(static_cast<double>(m) / 10.0));
      const RmInstance inst = generate_rm_instance(m, o.seed + static_cast<std::uint64_t>(t), bound, opt);
      const ProblemInstance p = build_rank_minimization(inst.A_mats, inst.b, {m, d}, inst.rank, bound);
      const Vector x = solve(p, defaults).feasible_point;
      const auto i = static_cast<std::size_t>(t);
      max_err[i] = (x - flatten(inst.X_true)).lpNorm<Eigen::Infinity>();
      rms[i] = metric_rms(x, flatten(inst.X_true));
    });
    write_benchmark(o.out_dir, suite, {{"max_abs_error", max_err}, {"rms_error", rms}}, log);
    return 0;
  }
  throw InputError("benchmark: unknown suite '" + suite + "' (expected sr-oracle, support-recovery or rm-recovery)");
}

// ---------------------------------------------------------------------------
// verify

namespace {

class Tally {
 public:
  explicit Tally(std::ostream& log) : log_(log) {}
  void record(const std::string& name, int checks, int failures) {
    checks_ += checks;
    failures_ += failures;
    log_ << (failures == 0 ? "ok    " : "FAIL  ") << name << ": " << checks - failures << '/' << checks << '\n';
  }
  int finish(const std::string& suite) const {
    log_ << suite << ": " << checks_ << " checks, " << failures_ << " failures\n";
    return failures_ == 0 ? 0 : kExitError;
  }

 private:
  std::ostream& log_;
  int checks_ = 0;
  int failures_ = 0;
};

/// min over y of (|y| - bound)_+^2/(2 mu) + beta y^2/2 + (y - a)^2/(2 gamma), and
/// of y^2/(2 mu) + beta y^2/2 + (y - a)^2/(2 gamma); the two pieces of the
/// per-support decomposition in one coordinate.
double kept_coordinate_min(double a, double gamma, double mu, double beta, double bound) {
  double t = a / (1.0 + beta * gamma);
  if (std::abs(t) > bound) t = (a / gamma + (a > 0 ? bound : -bound) / mu) / (1.0 / mu + beta + 1.0 / gamma);
  const double e = std::max(std::abs(t) - bound, 0.0);
  return e * e / (2.0 * mu) + 0.5 * beta * t * t + (t - a) * (t - a) / (2.0 * gamma);
}

double dropped_coordinate_min(double a, double gamma, double mu, double beta) {
  const double y = (a / gamma) / (1.0 / mu + beta + 1.0 / gamma);
  return y * y / (2.0 * mu) + 0.5 * beta * y * y + (y - a) * (y - a) / (2.0 * gamma);
}

int penalized_prox_failures(int cases, std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0;
  for (int t = 0; t < cases; ++t) {
    const double bound = rng.uniform(0.2, 3.0);
    const SparseBoxSet set(2, 1, bound);
    const Vector x = 3.0 * rng.normal_vector(2);
    const double gamma = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const double mu = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
    const double beta = rng.uniform(0.0, 2.0);
    const Vector y = prox_penalized_indicator(x, set, gamma, mu, beta);
    const double dist = set.distance(y);
    const double achieved = dist * dist / (2.0 * mu) + 0.5 * beta * y.squaredNorm() + (y - x).squaredNorm() / (2.0 * gamma);
    double minimum = kInfinity;
    for (int keep = 0; keep < 2; ++keep)
      minimum = std::min(minimum, kept_coordinate_min(x(keep), gamma, mu, beta, bound) +
                                      dropped_coordinate_min(x(1 - keep), gamma, mu, beta));
    if (!(std::abs(achieved - minimum) <= 1e-6)) ++failures;
  }
  return failures;
}

Vector fd_gradient(const SmoothLoss& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vector p = x, q = x;
    p(i) += h;
    q(i) -= h;
    g(i) = (f.value(p) - f.value(q)) / (2.0 * h);
  }
  return g;
}

int verify_prox_suite(std::ostream& log) {
  Tally tally(log);
  Rng rng(2024);

  tally.record("penalized-indicator prox vs per-support minimum", 1000, penalized_prox_failures(1000, 2024));

  int failures = 0;
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
    const Vector fast = flatten(prox_masked_least_squares(obs, gamma, V));
    if ((fast - prox_least_squares(S, z, gamma, flatten(V))).lpNorm<Eigen::Infinity>() > 1e-10) ++failures;
  }
  tally.record("masked prox vs dense least squares", 20, failures);

  failures = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Matrix> mats;
    for (int i = 0; i < 5; ++i) mats.push_back(rng.normal_matrix(3, 4));
    const Vector b = rng.normal_vector(5);
    const Matrix V = rng.normal_matrix(3, 4);
    const double gamma = rng.uniform(0.01, 2.0);
    const Vector fast = flatten(prox_affine_map_least_squares(mats, b, gamma, V));
    const Vector dense = prox_least_squares(stack_measurements(mats, {3, 4}), b, gamma, flatten(V));
    if ((fast - dense).lpNorm<Eigen::Infinity>() > 1e-10) ++failures;
  }
  tally.record("affine-map prox vs vectorized system", 20, failures);

  failures = 0;
  for (int t = 0; t < 10; ++t) {
    const Matrix X = 2.0 * rng.normal_matrix(3, 3);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.index(2));
    const double bound = rng.uniform(0.5, 3.0);
    const RankOracleResult oracle = rank_projection_oracle(X, r, bound, 10000, static_cast<std::uint64_t>(t));
    const double mine = (X - project_rank_spectral(X, r, bound)).norm();
    if (mine > oracle.best_random_distance + 1e-12) ++failures;
  }
  tally.record("rank projection vs random feasible candidates", 10, failures);

  const SmoothedFunction huber{std::make_shared<L1Norm>(), 1.0, 0.0};
  tally.record("Huber prox example", 1, std::abs(smoothed_prox(huber, 1.0, Vector::Constant(1, 3.0))(0) - 2.0) > 1e-9);

  const auto fa1 = prox_fa_loss(Matrix::Constant(1, 1, 2.0), 1.0, Matrix::Constant(1, 1, 1.0), Vector::Constant(1, 0.5));
  const auto fa2 = prox_fa_loss(Matrix::Constant(1, 1, 1.0), 1.0, Matrix::Zero(1, 1), Vector::Constant(1, 2.0));
  tally.record("factor-analysis prox KKT examples", 2,
               int(std::abs(fa1.X(0, 0) - 1.2) > 1e-6 || std::abs(fa1.d(0) - 0.7) > 1e-6) +
                   int(std::abs(fa2.X(0, 0)) > 1e-6 || std::abs(fa2.d(0) - 1.0) > 1e-6));
  return tally.finish("prox-suite");
}

int verify_property_suite(std::ostream& log) {
  Tally tally(log);
  Rng rng(7);

  std::vector<std::pair<std::string, std::shared_ptr<const SmoothLoss>>> losses;
  losses.emplace_back("least squares", std::make_shared<LeastSquaresLoss>(rng.normal_matrix(4, 6), rng.normal_vector(4)));
  std::vector<Observation> obs = {{0, 0, 1.0}, {1, 2, -0.5}, {2, 1, 2.0}};
  losses.emplace_back("masked least squares", std::make_shared<MaskedLeastSquaresLoss>(Shape{3, 3}, obs));
  std::vector<Matrix> mats = {rng.normal_matrix(2, 3), rng.normal_matrix(2, 3), rng.normal_matrix(2, 3)};
  losses.emplace_back("affine map", std::make_shared<AffineMapLeastSquaresLoss>(Shape{2, 3}, mats, rng.normal_vector(3)));
  const Matrix F = rng.normal_matrix(3, 1);
  losses.emplace_back("factor analysis", std::make_shared<FactorAnalysisLoss>(F * F.transpose() + Matrix::Identity(3, 3)));
  losses.emplace_back("smoothed l1", std::make_shared<SmoothedLoss>(SmoothedFunction{std::make_shared<L1Norm>(), 0.5, 0.0}, 4));
  for (const auto& [name, loss] : losses) {
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
      const Vector x = rng.normal_vector(loss->dimension());
      const Vector fd = fd_gradient(*loss, x);
      if ((loss->gradient(x) - fd).norm() / std::max(1.0, fd.norm()) > 1e-5) ++failures;
    }
    tally.record(name + ": gradient vs finite differences", 100, failures);
  }

  std::vector<std::pair<std::string, std::shared_ptr<const ProjectableSet>>> sets;
  sets.emplace_back("sparse box", std::make_shared<SparseBoxSet>(6, 2, 0.5));
  sets.emplace_back("rank spectral", std::make_shared<RankSpectralSet>(Shape{3, 4}, 1, 1.0));
  for (const auto& [name, set] : sets) {
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
      const Vector x = 2.0 * rng.normal_vector(set->dimension());
      const Vector p = set->project(x);
      if (!set->contains(p) || (set->project(p) - p).norm() > 1e-12) ++failures;
    }
    tally.record(name + ": membership and idempotence", 100, failures);
  }
  return tally.finish("property-suite");
}

}  // namespace

int cmd_verify(const std::string& suite, std::ostream& log) {
  if (suite == "prox-suite") return verify_prox_suite(log);
  if (suite == "property-suite") return verify_property_suite(log);
  throw InputError("verify: unknown suite '" + suite + "' (expected prox-suite or property-suite)");
}

// ---------------------------------------------------------------------------
// argument parsing

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"NExOS: exterior-point solver for nonconvex constrained problems"};
  app.require_subcommand(1);

  // solve: flags override the config file, which overrides built-in defaults.
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem instance");
  std::string config_path;
  std::optional<std::string> family, A_path, b_path, obs_path, sigma_path, out_dir;
  std::optional<Eigen::Index> rows, cols, m, k, rank;
  std::optional<std::uint64_t> seed, start_seed;
  std::optional<double> bound, beta, mu_init, mu_min, rho, gamma, eps, delta;
  std::optional<int> max_inner, max_outer, starts;
  bool trace = false, strict = false;
  solve_cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  solve_cmd->add_option("--family", family, "sr | rm | mc | fa");
  solve_cmd->add_option("--A", A_path, "design matrix (sr) or stacked measurements (rm)");
  solve_cmd->add_option("--b", b_path, "right-hand side vector");
  solve_cmd->add_option("--observations", obs_path, "observed entries (mc)");
  solve_cmd->add_option("--sigma", sigma_path, "covariance matrix (fa)");
  solve_cmd->add_option("--rows", rows, "matrix rows (rm, mc)");
  solve_cmd->add_option("--cols", cols, "matrix columns (rm, mc)");
  solve_cmd->add_option("--m", m, "generator size");
  solve_cmd->add_option("--seed", seed, "generator seed");
  solve_cmd->add_option("--k", k, "cardinality bound (sr)");
  solve_cmd->add_option("--rank", rank, "rank bound (rm, mc, fa)");
  solve_cmd->add_option("--bound", bound, "bound Gamma on the infinity / spectral norm");
  solve_cmd->add_option("--beta", beta);
  solve_cmd->add_option("--mu-init", mu_init);
  solve_cmd->add_option("--mu-min", mu_min);
  solve_cmd->add_option("--rho", rho);
  solve_cmd->add_option("--gamma", gamma);
  solve_cmd->add_option("--eps", eps, "inner fixed-point tolerance");
  solve_cmd->add_option("--delta", delta, "outer stopping tolerance");
  solve_cmd->add_option("--max-inner", max_inner);
  solve_cmd->add_option("--max-outer", max_outer);
  solve_cmd->add_option("--starts", starts, "number of random starts");
  solve_cmd->add_option("--start-seed", start_seed);
  solve_cmd->add_option("--out", out_dir, "output directory");
  solve_cmd->add_flag("--trace", trace, "write trace.csv");
  solve_cmd->add_flag("--strict", strict, "abort when an inner solve misses its tolerance");

  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic instance");
  std::string gen_family;
  Eigen::Index gen_m = 10;
  std::uint64_t gen_seed = 1;
  std::string gen_out = ".";
  std::optional<double> gen_bound;
  gen_cmd->add_option("family", gen_family, "sr | rm")->required();
  gen_cmd->add_option("--m", gen_m);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--out", gen_out);
  gen_cmd->add_option("--bound", gen_bound, "rm: singular-value bound");

  auto* bench_cmd = app.add_subcommand("benchmark", "Run a desk-scale study");
  std::string bench_suite;
  BenchmarkOptions bench;
  std::string bench_out = ".";
  bench_cmd->add_option("suite", bench_suite, "sr-oracle | support-recovery | rm-recovery")->required();
  bench_cmd->add_option("--trials", bench.trials);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--m", bench.m);
  bench_cmd->add_option("--threads", bench.threads, "worker threads (NEXOS_THREADS caps this)");
  bench_cmd->add_option("--out", bench_out);

  auto* verify_cmd = app.add_subcommand("verify", "Run an oracle/property suite");
  std::string verify_suite;
  verify_cmd->add_option("suite", verify_suite, "prox-suite | property-suite")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*solve_cmd) {
      RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
      auto apply = [](auto& target, const auto& flag) {
        if (flag) target = *flag;
      };
      apply(c.family, family);
      apply(c.A_path, A_path);
      apply(c.b_path, b_path);
      apply(c.observations_path, obs_path);
      apply(c.sigma_path, sigma_path);
      apply(c.rows, rows);
      apply(c.cols, cols);
      apply(c.m, m);
      apply(c.seed, seed);
      apply(c.k, k);
      apply(c.rank, rank);
      if (bound) c.bound = bound;
      apply(c.settings.beta, beta);
      apply(c.settings.mu_init, mu_init);
      apply(c.settings.mu_min, mu_min);
      apply(c.settings.rho, rho);
      apply(c.settings.gamma, gamma);
      apply(c.settings.eps_fixed_point, eps);
      apply(c.settings.delta_stop, delta);
      apply(c.settings.max_inner_iters, max_inner);
      apply(c.settings.max_outer_stages, max_outer);
      apply(c.num_starts, starts);
      apply(c.start_seed, start_seed);
      apply(c.output_dir, out_dir);
      if (trace) c.trace = true;
      if (strict) c.settings.strict_inner = true;
      return cmd_solve(c, out);
    }
    if (*gen_cmd) return cmd_generate(gen_family, gen_m, gen_seed, gen_out, out, gen_bound);
    if (*bench_cmd) {
      bench.out_dir = bench_out;
      return cmd_benchmark(bench_suite, bench, out);
    }
    if (*verify_cmd) return cmd_verify(verify_suite, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace nexos::cli

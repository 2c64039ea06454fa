#pragma once

#include "nexos/core.hpp"
#include "nexos/problem_instance.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace nexos::cli {

/// Everything needed to reproduce one `solve` run.
///
/// The problem comes either from files or, for sr/rm, from the synthetic
/// generator (used whenever no data file is given). Zero-valued k/rank and a
/// missing bound mean "derive from the data".
struct RunConfig {
  std::string family = "sr";  // sr | rm | mc | fa

  // Data files (.mtx or .csv).
  std::string A_path;             // sr: design matrix; rm: stacked measurements, row i = vec(A_i)^T
  std::string b_path;             // sr, rm
  std::string observations_path;  // mc
  std::string sigma_path;         // fa
  Eigen::Index rows = 0;          // rm, mc
  Eigen::Index cols = 0;

  // Synthetic generator inputs.
  Eigen::Index m = 10;
  std::uint64_t seed = 1;

  Eigen::Index k = 0;
  Eigen::Index rank = 0;
  std::optional<double> bound;

  SolverSettings settings;
  int num_starts = 1;
  std::uint64_t start_seed = 0;

  std::string output_dir = ".";
  bool trace = false;

  bool operator==(const RunConfig&) const;
};

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys are rejected; absent keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the instance described by `config`.
ProblemInstance build_problem(const RunConfig& config);

/// Exit codes.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

int exit_code(SolveStatus status);

/// Writes result.json, the solution CSV and (optionally) trace.csv into
/// config.output_dir.
int cmd_solve(const RunConfig& config, std::ostream& log);

/// sr: A.mtx, b.csv, xtrue.csv; rm: A.mtx (stacked), b.csv, Xtrue.csv.
int cmd_generate(const std::string& family, Eigen::Index m, std::uint64_t seed, const std::filesystem::path& out_dir,
                 std::ostream& log, std::optional<double> bound = std::nullopt);

struct BenchmarkOptions {
  int trials = 50;
  std::uint64_t seed = 7;
  /// 0 picks the suite's default size.
  Eigen::Index m = 0;
  std::filesystem::path out_dir = ".";
  /// 0 means hardware concurrency, capped by NEXOS_THREADS.
  unsigned threads = 0;
};

/// Suites: sr-oracle, support-recovery, rm-recovery. Writes
/// benchmark_<suite>.csv (one row per trial) and benchmark_<suite>_summary.csv
/// (mean and standard error per metric).
int cmd_benchmark(const std::string& suite, const BenchmarkOptions& options, std::ostream& log);

/// Suites: prox-suite, property-suite. Prints pass/fail counts.
int cmd_verify(const std::string& suite, std::ostream& log);

/// Worker count for benchmarks: `requested` (0 = hardware concurrency),
/// capped by NEXOS_THREADS when set.
unsigned benchmark_threads(unsigned requested);

/// Entry point shared by the executable and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nexos::cli

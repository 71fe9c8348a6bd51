#ifndef MULTIPASS_HARNESS_HPP
#define MULTIPASS_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "multipass/problem.hpp"
#include "multipass/sgd.hpp"

namespace multipass {

enum class Aggregation { ArithmeticMean, GeometricMean };

// Full experiment grid: for every sample size in n_grid and every
// replication, draw a dataset, run averaged SGD to the iteration budget,
// and record the checkpoint minimizing the exact excess risk.
struct SweepConfig {
  ProblemSpec spec;
  std::vector<std::size_t> n_grid;  // strictly increasing, entries >= 1
  std::size_t replications = 1;
  SamplingVariant scheme = SamplingVariant::WithReplacement;
  std::uint64_t base_seed = 0;
  Aggregation aggregation = Aggregation::ArithmeticMean;
  double t_max_budget = 4.0;      // iteration budget multiplier
  double checkpoint_ratio = 1.1;  // geometric checkpoint spacing, > 1
  std::size_t jobs = 0;           // worker threads; 0 uses all cores

  explicit SweepConfig(ProblemSpec s) : spec(s) {}
};

// Iteration budget for sample size n:
//   ceil(budget * n^{alpha/(2 r alpha + 1)})   when the problem is hard,
//   ceil(budget * n)                           otherwise.
std::size_t sweep_t_max(const ProblemSpec& spec, std::size_t n,
                        double budget = 4.0);

struct RunSummary {
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;  // dataset seed for this (n, rep) cell
  std::size_t t_star = 0;
  double min_excess = 0.0;
  std::vector<CheckpointRisk> trajectory;
};

struct AggregatePoint {
  std::size_t n = 0;
  double t_star_mean = 0.0;  // per the configured aggregation rule
  double t_star_std = 0.0;   // sample standard deviation of t* across reps
};

struct SweepResult {
  SweepConfig config;
  std::vector<RunSummary> runs;  // ordered by (n, rep)
  std::vector<AggregatePoint> aggregate;
  double elapsed_seconds = 0.0;  // timing metadata, not part of equality

  explicit SweepResult(SweepConfig c) : config(std::move(c)) {}
};

// Checkpoint with minimal excess risk; ties resolve to the smallest t.
// Throws std::invalid_argument on an empty trajectory.
std::size_t find_t_star(const std::vector<CheckpointRisk>& trajectory);
std::size_t find_t_star(const RunResult& run);

// Runs the (n, replication) grid on a worker pool and merges results in
// key order, so output is independent of scheduling. Deterministic given
// base_seed: cell (n, rep) draws its dataset from
// derive_seed({base_seed, n, rep}) and its SGD index stream from
// derive_seed({cell_seed, 1}). Worker failures rethrow with (n, rep)
// context.
SweepResult sweep(const SweepConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;  // standard error of the fitted slope
  double theory_slope = 0.0;
  bool pass = false;  // |slope - theory_slope| <= tolerance
};

// Predicted growth exponent of t*(n): 1 when r >= (alpha-1)/(2 alpha)
// (one effective pass suffices), alpha/(2 r alpha + 1) otherwise.
double theory_slope(const ProblemSpec& spec);

// Least squares of log aggregated t* against log n. Requires at least
// three grid points.
SlopeFit fit_slope(const SweepResult& result, double tolerance);

// Per-replication log-log slopes, the error-bar data behind the
// aggregate fit. Same three-point requirement as fit_slope.
std::vector<double> replication_slopes(const SweepResult& result);

// Schema-versioned JSON persistence; load rejects other schema versions.
// persist(load(path)) reproduces the file byte for byte.
void persist(const SweepResult& result, const std::string& path);
SweepResult load_result(const std::string& path);

// Aggregate table as CSV: header n,t_star_mean,t_star_std.
void export_csv(const SweepResult& result, const std::string& path);

// Plot-ready two-column table: log n, log aggregated t*.
void export_loglog(const SweepResult& result, const std::string& path);

}  // namespace multipass

#endif

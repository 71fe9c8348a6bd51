#include "multipass/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "multipass/kernel.hpp"
#include "multipass/rng.hpp"

namespace multipass {

namespace {

using nlohmann::json;

const char* scheme_name(SamplingVariant v) {
  switch (v) {
    case SamplingVariant::WithReplacement: return "replacement";
    case SamplingVariant::WithoutReplacement: return "without";
    case SamplingVariant::Cycle: return "cycle";
  }
  throw std::logic_error("unknown sampling variant");
}

SamplingVariant scheme_from_name(const std::string& name) {
  if (name == "replacement") return SamplingVariant::WithReplacement;
  if (name == "without") return SamplingVariant::WithoutReplacement;
  if (name == "cycle") return SamplingVariant::Cycle;
  throw std::runtime_error("unknown sampling scheme: " + name);
}

const char* aggregation_name(Aggregation a) {
  return a == Aggregation::ArithmeticMean ? "arithmetic" : "geometric";
}

Aggregation aggregation_from_name(const std::string& name) {
  if (name == "arithmetic") return Aggregation::ArithmeticMean;
  if (name == "geometric") return Aggregation::GeometricMean;
  throw std::runtime_error("unknown aggregation rule: " + name);
}

void validate(const SweepConfig& config) {
  if (config.n_grid.empty())
    throw std::invalid_argument("n_grid must be nonempty");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] == 0)
      throw std::invalid_argument("sample sizes must be positive");
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1])
      throw std::invalid_argument("n_grid must be strictly increasing");
  }
  if (config.replications == 0)
    throw std::invalid_argument("replications must be at least 1");
  if (!(config.t_max_budget > 0.0))
    throw std::invalid_argument("t_max_budget must be positive");
  if (!(config.checkpoint_ratio > 1.0))
    throw std::invalid_argument("checkpoint_ratio must exceed 1");
}

RunSummary run_cell(const SweepConfig& config, std::size_t n,
                    std::size_t rep) {
  const std::uint64_t seed =
      derive_seed({config.base_seed, static_cast<std::uint64_t>(n),
                   static_cast<std::uint64_t>(rep)});
  const Dataset data = sample_dataset(config.spec, n, seed);
  const auto kernel = shared_evaluator(config.spec.alpha);
  const Eigen::MatrixXd gram = gram_matrix(*kernel, data.xs);
  const RiskEvaluator risk(config.spec, data.xs);

  SGDConfig run_cfg;
  run_cfg.gamma = config.spec.default_gamma();
  run_cfg.t_max = sweep_t_max(config.spec, n, config.t_max_budget);
  run_cfg.scheme = config.scheme;
  run_cfg.checkpoints =
      geometric_checkpoints(run_cfg.t_max, n, config.checkpoint_ratio);
  run_cfg.seed = derive_seed({seed, 1});

  RunResult run = run_sgd(data, gram, run_cfg,
                          [&](const DualModel& m) { return risk(m.coeffs); });

  RunSummary out;
  out.n = n;
  out.rep = rep;
  out.seed = seed;
  out.t_star = run.t_star;
  out.min_excess =
      std::min_element(run.trajectory.begin(), run.trajectory.end(),
                       [](const CheckpointRisk& a, const CheckpointRisk& b) {
                         return a.excess < b.excess;
                       })
          ->excess;
  out.trajectory = std::move(run.trajectory);
  return out;
}

struct SlopeLine {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
};

SlopeLine loglog_line(const std::vector<double>& ns,
                      const std::vector<double>& ts) {
  const auto k = static_cast<double>(ns.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(ns.size()), ys(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    xs[i] = std::log(ns[i]);
    ys[i] = std::log(ts[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeLine out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double r = ys[i] - (out.intercept + out.slope * xs[i]);
    ss_res += r * r;
  }
  if (ns.size() > 2) out.std_error = std::sqrt(ss_res / (k - 2.0) / sxx);
  return out;
}

json config_to_json(const SweepConfig& c) {
  return json{{"alpha", c.spec.alpha},
              {"r", c.spec.r},
              {"sigma", c.spec.sigma},
              {"n_grid", c.n_grid},
              {"replications", c.replications},
              {"scheme", scheme_name(c.scheme)},
              {"base_seed", c.base_seed},
              {"aggregation", aggregation_name(c.aggregation)},
              {"t_max_budget", c.t_max_budget},
              {"checkpoint_ratio", c.checkpoint_ratio},
              {"jobs", c.jobs}};
}

SweepConfig config_from_json(const json& j) {
  ProblemSpec spec(j.at("alpha").get<double>(), j.at("r").get<double>(),
                   j.at("sigma").get<double>());
  SweepConfig c(spec);
  c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  c.replications = j.at("replications").get<std::size_t>();
  c.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  c.base_seed = j.at("base_seed").get<std::uint64_t>();
  c.aggregation = aggregation_from_name(j.at("aggregation").get<std::string>());
  c.t_max_budget = j.at("t_max_budget").get<double>();
  c.checkpoint_ratio = j.at("checkpoint_ratio").get<double>();
  c.jobs = j.at("jobs").get<std::size_t>();
  return c;
}

constexpr int kSchemaVersion = 1;

}  // namespace

std::size_t sweep_t_max(const ProblemSpec& spec, std::size_t n,
                        double budget) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  const double exponent =
      spec.hard() ? spec.alpha / (2.0 * spec.r * spec.alpha + 1.0) : 1.0;
  const double t = budget * std::pow(static_cast<double>(n), exponent);
  return static_cast<std::size_t>(std::ceil(t));
}

std::size_t find_t_star(const std::vector<CheckpointRisk>& trajectory) {
  if (trajectory.empty())
    throw std::invalid_argument("trajectory must be nonempty");
  std::size_t best_t = trajectory.front().t;
  double best = trajectory.front().excess;
  for (const auto& point : trajectory) {
    if (point.excess < best) {
      best = point.excess;
      best_t = point.t;
    }
  }
  return best_t;
}

std::size_t find_t_star(const RunResult& run) {
  return find_t_star(run.trajectory);
}

SweepResult sweep(const SweepConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  const std::size_t cells = config.n_grid.size() * config.replications;
  std::vector<RunSummary> results(cells);
  std::vector<std::string> errors(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells) return;
      const std::size_t n = config.n_grid[k / config.replications];
      const std::size_t rep = k % config.replications;
      try {
        results[k] = run_cell(config, n, rep);
      } catch (const std::exception& e) {
        errors[k] = "sweep cell (n=" + std::to_string(n) +
                    ", rep=" + std::to_string(rep) + "): " + e.what();
      }
    }
  };

  std::size_t workers =
      config.jobs > 0 ? config.jobs
                      : std::max<std::size_t>(
                            std::thread::hardware_concurrency(), 1);
  workers = std::min(workers, cells);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error(err);

  SweepResult out(config);
  out.runs = std::move(results);
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    AggregatePoint point;
    point.n = config.n_grid[ni];
    double sum = 0.0, log_sum = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t rep = 0; rep < config.replications; ++rep) {
      const auto t = static_cast<double>(
          out.runs[ni * config.replications + rep].t_star);
      sum += t;
      log_sum += std::log(t);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    const auto reps = static_cast<double>(config.replications);
    point.t_star_mean = config.aggregation == Aggregation::ArithmeticMean
                            ? sum / reps
                            : std::exp(log_sum / reps);
    // keep the mean inside the replication envelope despite rounding
    point.t_star_mean = std::clamp(point.t_star_mean, lo, hi);
    double sq = 0.0;
    const double mean = sum / reps;
    for (std::size_t rep = 0; rep < config.replications; ++rep) {
      const auto t = static_cast<double>(
          out.runs[ni * config.replications + rep].t_star);
      sq += (t - mean) * (t - mean);
    }
    point.t_star_std =
        config.replications > 1 ? std::sqrt(sq / (reps - 1.0)) : 0.0;
    out.aggregate.push_back(point);
  }

  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

double theory_slope(const ProblemSpec& spec) {
  if (spec.r >= (spec.alpha - 1.0) / (2.0 * spec.alpha)) return 1.0;
  return spec.alpha / (2.0 * spec.r * spec.alpha + 1.0);
}

SlopeFit fit_slope(const SweepResult& result, double tolerance) {
  if (result.aggregate.size() < 3)
    throw std::invalid_argument("slope fit needs at least 3 grid points");
  std::vector<double> ns, ts;
  for (const auto& point : result.aggregate) {
    ns.push_back(static_cast<double>(point.n));
    ts.push_back(point.t_star_mean);
  }
  const SlopeLine line = loglog_line(ns, ts);
  SlopeFit out;
  out.slope = line.slope;
  out.intercept = line.intercept;
  out.std_error = line.std_error;
  out.theory_slope = theory_slope(result.config.spec);
  out.pass = std::abs(out.slope - out.theory_slope) <= tolerance;
  return out;
}

std::vector<double> replication_slopes(const SweepResult& result) {
  const std::size_t reps = result.config.replications;
  const std::size_t grid = result.config.n_grid.size();
  if (grid < 3)
    throw std::invalid_argument("slope fit needs at least 3 grid points");
  std::vector<double> slopes;
  slopes.reserve(reps);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::vector<double> ns, ts;
    for (std::size_t ni = 0; ni < grid; ++ni) {
      ns.push_back(static_cast<double>(result.config.n_grid[ni]));
      ts.push_back(static_cast<double>(result.runs[ni * reps + rep].t_star));
    }
    slopes.push_back(loglog_line(ns, ts).slope);
  }
  return slopes;
}

void persist(const SweepResult& result, const std::string& path) {
  json runs = json::array();
  for (const auto& run : result.runs) {
    json trajectory = json::array();
    for (const auto& point : run.trajectory)
      trajectory.push_back(json::array({point.t, point.excess}));
    runs.push_back(json{{"n", run.n},
                        {"rep", run.rep},
                        {"seed", run.seed},
                        {"t_star", run.t_star},
                        {"min_excess", run.min_excess},
                        {"trajectory", std::move(trajectory)}});
  }
  json aggregate = json::array();
  for (const auto& point : result.aggregate)
    aggregate.push_back(json{{"n", point.n},
                             {"t_star_mean", point.t_star_mean},
                             {"t_star_std", point.t_star_std}});
  const json doc{{"schema_version", kSchemaVersion},
                 {"config", config_to_json(result.config)},
                 {"runs", std::move(runs)},
                 {"aggregate", std::move(aggregate)},
                 {"timing", json{{"elapsed_seconds", result.elapsed_seconds}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

SweepResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed result file " + path + ": " +
                             e.what());
  }
  const int version = doc.at("schema_version").get<int>();
  if (version != kSchemaVersion)
    throw std::runtime_error("result file " + path + " has schema version " +
                             std::to_string(version) + ", expected " +
                             std::to_string(kSchemaVersion));
  SweepResult result(config_from_json(doc.at("config")));
  for (const auto& jrun : doc.at("runs")) {
    RunSummary run;
    run.n = jrun.at("n").get<std::size_t>();
    run.rep = jrun.at("rep").get<std::size_t>();
    run.seed = jrun.at("seed").get<std::uint64_t>();
    run.t_star = jrun.at("t_star").get<std::size_t>();
    run.min_excess = jrun.at("min_excess").get<double>();
    for (const auto& pair : jrun.at("trajectory")) {
      CheckpointRisk point;
      point.t = pair.at(0).get<std::size_t>();
      point.excess = pair.at(1).get<double>();
      run.trajectory.push_back(point);
    }
    result.runs.push_back(std::move(run));
  }
  for (const auto& jpoint : doc.at("aggregate")) {
    AggregatePoint point;
    point.n = jpoint.at("n").get<std::size_t>();
    point.t_star_mean = jpoint.at("t_star_mean").get<double>();
    point.t_star_std = jpoint.at("t_star_std").get<double>();
    result.aggregate.push_back(point);
  }
  result.elapsed_seconds =
      doc.at("timing").at("elapsed_seconds").get<double>();
  return result;
}

void export_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "n,t_star_mean,t_star_std\n" << std::setprecision(17);
  for (const auto& point : result.aggregate)
    out << point.n << ',' << point.t_star_mean << ',' << point.t_star_std
        << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

void export_loglog(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "log_n,log_t_star\n" << std::setprecision(17);
  for (const auto& point : result.aggregate)
    out << std::log(static_cast<double>(point.n)) << ','
        << std::log(point.t_star_mean) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace multipass

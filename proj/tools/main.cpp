#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "multipass/checks.hpp"
#include "multipass/diagnostics.hpp"
#include "multipass/harness.hpp"
#include "multipass/problem.hpp"

namespace {

using nlohmann::json;
using namespace multipass;

std::string default_out(const std::string& name) {
  const char* dir = std::getenv("MULTIPASS_OUT_DIR");
  std::string d = dir && *dir ? dir : ".";
  if (d.back() != '/') d += '/';
  return d + name;
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

json report_to_json(const CheckReport& report, json config) {
  json items = json::array();
  for (const auto& item : report.items)
    items.push_back(json{{"name", item.name},
                         {"observed", item.observed},
                         {"limit", item.limit},
                         {"pass", item.pass}});
  return json{{"suite", report.suite},
              {"config", std::move(config)},
              {"checks", std::move(items)},
              {"pass", report.pass}};
}

int finish_report(const CheckReport& report, json config,
                  const std::string& out_path) {
  for (const auto& item : report.items)
    std::printf("%-34s %12.5e <= %12.5e  %s\n", item.name.c_str(),
                item.observed, item.limit, item.pass ? "pass" : "FAIL");
  write_json(report_to_json(report, std::move(config)), out_path);
  std::printf("report written to %s\n", out_path.c_str());
  return report.pass ? 0 : 1;
}

SamplingVariant variant_from_flag(const std::string& name) {
  if (name == "replacement") return SamplingVariant::WithReplacement;
  if (name == "without") return SamplingVariant::WithoutReplacement;
  return SamplingVariant::Cycle;
}

struct SweepFlags {
  double alpha = 0.0, r = 0.0, sigma = 0.2;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 1;
  std::string sampling = "replacement";
  std::uint64_t seed = 0;
  std::string aggregation = "arithmetic";
  double budget = 4.0, ratio = 1.1;
  std::size_t jobs = 0;
  std::string out = default_out("sweep.json");
};

int cmd_sweep(const SweepFlags& f) {
  SweepConfig config(ProblemSpec(f.alpha, f.r, f.sigma));
  config.n_grid = f.n_grid;
  config.replications = f.reps;
  config.scheme = variant_from_flag(f.sampling);
  config.base_seed = f.seed;
  config.aggregation = f.aggregation == "geometric"
                           ? Aggregation::GeometricMean
                           : Aggregation::ArithmeticMean;
  config.t_max_budget = f.budget;
  config.checkpoint_ratio = f.ratio;
  config.jobs = f.jobs;

  const SweepResult result = sweep(config);
  persist(result, f.out);

  std::printf("%8s %14s %14s\n", "n", "t_star_mean", "t_star_std");
  for (const auto& point : result.aggregate)
    std::printf("%8zu %14.3f %14.3f\n", point.n, point.t_star_mean,
                point.t_star_std);
  if (result.aggregate.size() >= 3) {
    const SlopeFit fit = fit_slope(result, 0.25);
    std::printf("log-log slope %.4f (theory %.4f)\n", fit.slope,
                fit.theory_slope);
  }
  std::printf("%zu runs in %.2fs; result written to %s\n", result.runs.size(),
              result.elapsed_seconds, f.out.c_str());
  return 0;
}

int cmd_slope(const std::string& in, double tolerance,
              const std::string& out) {
  const SweepResult result = load_result(in);
  const SlopeFit fit = fit_slope(result, tolerance);

  json doc{{"config", json{{"in", in}, {"tolerance", tolerance}}},
           {"fit",
            json{{"slope", fit.slope},
                 {"intercept", fit.intercept},
                 {"std_error", fit.std_error},
                 {"theory_slope", fit.theory_slope},
                 {"pass", fit.pass}}}};
  if (result.runs.size() ==
      result.config.n_grid.size() * result.config.replications) {
    const auto slopes = replication_slopes(result);
    doc["replication_slopes"] = slopes;
    std::printf("replication slopes:");
    for (double s : slopes) std::printf(" %.4f", s);
    std::printf("\n");
  }
  std::printf("slope %.6f  intercept %.6f  std_error %.6f\n", fit.slope,
              fit.intercept, fit.std_error);
  std::printf("theory %.6f  tolerance %.6f  %s\n", fit.theory_slope,
              tolerance, fit.pass ? "pass" : "FAIL");
  write_json(doc, out);
  return fit.pass ? 0 : 1;
}

int cmd_estimate(const std::string& features_path,
                 const std::string& labels_path, char delimiter,
                 const std::string& out) {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
  try {
    Eigen::MatrixXd table = read_csv_matrix(features_path, delimiter);
    if (labels_path.empty()) {
      if (table.cols() < 2)
        throw std::runtime_error(
            "need at least 2 columns when labels share the features file");
      features = table.leftCols(table.cols() - 1);
      labels = table.col(table.cols() - 1);
    } else {
      features = std::move(table);
      Eigen::MatrixXd label_table = read_csv_matrix(labels_path, delimiter);
      if (label_table.cols() == 1)
        labels = label_table.col(0);
      else if (label_table.rows() == 1)
        labels = label_table.row(0).transpose();
      else
        throw std::runtime_error("label file must be a single column or row");
      if (labels.size() != features.rows())
        throw std::runtime_error("label count does not match sample count");
    }
  } catch (const std::exception& e) {
    std::cerr << "estimate: bad input: " << e.what() << '\n';
    return 2;
  }

  const SpectrumProjection proj = ingest_features(features, labels);
  std::printf("samples %lld, features %lld\n",
              static_cast<long long>(features.rows()),
              static_cast<long long>(features.cols()));

  json doc{{"config", json{{"features", features_path},
                           {"labels", labels_path},
                           {"delimiter", std::string(1, delimiter)}}},
           {"spectrum", std::vector<double>(
                            proj.eigs.data(), proj.eigs.data() + proj.eigs.size())}};

  try {
    const SpectrumFit sf = fit_alpha(proj.eigs);
    std::printf("alpha_hat %.4f  (window [%zu, %zu], fit_quality %.4f)\n",
                sf.alpha_hat, sf.m_lo, sf.m_hi, sf.fit_quality);
    doc["alpha_hat"] = sf.alpha_hat;
    doc["fit_window"] = {sf.m_lo, sf.m_hi};
    doc["fit_quality"] = sf.fit_quality;
    if (sf.alpha_hat > 1.0) {
      const SourceFit rf = fit_r(proj.eigs, proj.coefficients, sf.alpha_hat);
      std::printf("r_hat %.4f  (beta_hat %.4f)\n", rf.r_hat, rf.beta_hat);
      doc["r_hat"] = rf.r_hat;
      doc["beta_hat"] = rf.beta_hat;
    } else {
      std::printf("r_hat unavailable (alpha_hat <= 1)\n");
      doc["r_hat"] = nullptr;
    }
  } catch (const std::invalid_argument& e) {
    std::printf("alpha_hat unavailable (%s)\n", e.what());
    doc["alpha_hat"] = nullptr;
    doc["r_hat"] = nullptr;
  }

  const double top = proj.eigs[0];
  json curve = json::array();
  if (top > 0.0) {
    std::printf("%14s %22s\n", "lambda", "effective_dimension");
    for (int k = 0; k <= 8; ++k) {
      const double lambda = top * std::pow(10.0, -k);
      const double nd = effective_dimension(proj.eigs, lambda);
      std::printf("%14.6e %22.6f\n", lambda, nd);
      curve.push_back(json::array({lambda, nd}));
    }
  }
  doc["effective_dimension"] = std::move(curve);
  write_json(doc, out);
  std::printf("report written to %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-pass averaged SGD for kernel least-squares regression"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "TOML config file with keys under a [subcommand] section; "
                 "explicit flags win");
  int rc = 0;

  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run a t*(n) sweep over an n-grid");
  auto flags = std::make_shared<SweepFlags>();
  sweep_cmd->add_option("--alpha", flags->alpha, "Kernel order, > 1")
      ->required();
  sweep_cmd->add_option("--r", flags->r, "Target smoothness, > 0")
      ->required();
  sweep_cmd->add_option("--sigma", flags->sigma, "Noise level")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--n-grid", flags->n_grid,
                   "Comma-separated increasing sample sizes")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--reps", flags->reps, "Replications per n")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--sampling", flags->sampling,
                   "Index sampling: replacement|without|cycle")
      ->check(CLI::IsMember({"replacement", "without", "cycle"}))
      ->capture_default_str();
  sweep_cmd->add_option("--seed", flags->seed, "Base seed")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--aggregation", flags->aggregation,
                   "t* aggregation: arithmetic|geometric")
      ->check(CLI::IsMember({"arithmetic", "geometric"}))
      ->capture_default_str();
  sweep_cmd->add_option("--budget", flags->budget, "Iteration budget factor")
      ->capture_default_str();
  sweep_cmd->add_option("--ratio", flags->ratio, "Checkpoint spacing ratio")
      ->capture_default_str();
  sweep_cmd
      ->add_option("--jobs", flags->jobs,
                   "Worker threads (0 = all available cores)")
      ->capture_default_str();
  sweep_cmd->add_option("--out", flags->out, "Result JSON path")
      ->capture_default_str();
  sweep_cmd->callback([&rc, flags] { rc = cmd_sweep(*flags); });

  auto* slope_cmd = app.add_subcommand(
      "slope", "Fit the log-log slope of a sweep result against theory");
  auto slope_in = std::make_shared<std::string>();
  auto slope_tol = std::make_shared<double>(0.25);
  auto slope_out = std::make_shared<std::string>(default_out("slope.json"));
  slope_cmd->add_option("--in", *slope_in, "Sweep result JSON")->required();
  slope_cmd->add_option("--tolerance", *slope_tol, "Allowed |slope - theory|")
      ->capture_default_str();
  slope_cmd->add_option("--out", *slope_out, "Fit JSON path")
      ->capture_default_str();
  slope_cmd->callback([&rc, slope_in, slope_tol, slope_out] {
    rc = cmd_slope(*slope_in, *slope_tol, *slope_out);
  });

  auto* filter_cmd = app.add_subcommand(
      "filter-check", "Averaged batch GD / spectral filter property suite");
  auto filter_gamma = std::make_shared<double>(0.0);
  auto filter_n = std::make_shared<std::size_t>(32);
  auto filter_seed = std::make_shared<std::uint64_t>(2026);
  auto filter_out =
      std::make_shared<std::string>(default_out("filter_check.json"));
  filter_cmd
      ->add_option("--gamma", *filter_gamma,
                   "Step size (0 = default 1/(4 R^2))")
      ->capture_default_str();
  filter_cmd->add_option("--n", *filter_n, "Sample size")
      ->capture_default_str();
  filter_cmd->add_option("--seed", *filter_seed, "Seed")
      ->capture_default_str();
  filter_cmd->add_option("--out", *filter_out, "Report JSON path")
      ->capture_default_str();
  filter_cmd->callback([&rc, filter_gamma, filter_n, filter_seed, filter_out] {
    const CheckReport report = filter_check(*filter_gamma, *filter_n,
                                            *filter_seed);
    rc = finish_report(report,
                       json{{"gamma", *filter_gamma},
                            {"n", *filter_n},
                            {"seed", *filter_seed}},
                       *filter_out);
  });

  auto* semi_cmd = app.add_subcommand(
      "semistoch-check", "Semi-stochastic recursion property suite");
  auto semi_seed = std::make_shared<std::uint64_t>(2026);
  auto semi_reps = std::make_shared<std::size_t>(200);
  auto semi_out =
      std::make_shared<std::string>(default_out("semistoch_check.json"));
  semi_cmd->add_option("--seed", *semi_seed, "Seed")->capture_default_str();
  semi_cmd->add_option("--reps", *semi_reps, "Monte Carlo replications")
      ->capture_default_str();
  semi_cmd->add_option("--out", *semi_out, "Report JSON path")
      ->capture_default_str();
  semi_cmd->callback([&rc, semi_seed, semi_reps, semi_out] {
    const CheckReport report = semistoch_check(*semi_seed, *semi_reps);
    rc = finish_report(report,
                       json{{"seed", *semi_seed}, {"reps", *semi_reps}},
                       *semi_out);
  });

  auto* kernel_cmd = app.add_subcommand(
      "kernel-check", "Kernel convolution identity property suite");
  auto kernel_seed = std::make_shared<std::uint64_t>(2026);
  auto kernel_points = std::make_shared<std::size_t>(20);
  auto kernel_tol = std::make_shared<double>(1e-5);
  auto kernel_out =
      std::make_shared<std::string>(default_out("kernel_check.json"));
  kernel_cmd->add_option("--seed", *kernel_seed, "Seed")
      ->capture_default_str();
  kernel_cmd->add_option("--points", *kernel_points, "Random (x,z) pairs")
      ->capture_default_str();
  kernel_cmd->add_option("--tolerance", *kernel_tol, "Absolute tolerance")
      ->capture_default_str();
  kernel_cmd->add_option("--out", *kernel_out, "Report JSON path")
      ->capture_default_str();
  kernel_cmd->callback([&rc, kernel_seed, kernel_points, kernel_tol,
                        kernel_out] {
    const CheckReport report =
        kernel_check(*kernel_seed, *kernel_points, *kernel_tol);
    rc = finish_report(report,
                       json{{"seed", *kernel_seed},
                            {"points", *kernel_points},
                            {"tolerance", *kernel_tol}},
                       *kernel_out);
  });

  auto* estimate_cmd = app.add_subcommand(
      "estimate", "Estimate decay exponents from a feature CSV");
  auto est_features = std::make_shared<std::string>();
  auto est_labels = std::make_shared<std::string>();
  auto est_delim = std::make_shared<std::string>(",");
  auto est_out = std::make_shared<std::string>(default_out("estimate.json"));
  estimate_cmd
      ->add_option("--features", *est_features,
                   "CSV of samples (rows); labels in the last column unless "
                   "--labels is given")
      ->required();
  estimate_cmd->add_option("--labels", *est_labels,
                           "Separate label CSV (one column)");
  estimate_cmd->add_option("--delimiter", *est_delim, "Field delimiter")
      ->capture_default_str();
  estimate_cmd->add_option("--out", *est_out, "Report JSON path")
      ->capture_default_str();
  estimate_cmd->callback([&rc, est_features, est_labels, est_delim, est_out] {
    if (est_delim->size() != 1)
      throw CLI::ValidationError("--delimiter must be a single character");
    rc = cmd_estimate(*est_features, *est_labels, (*est_delim)[0], *est_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}

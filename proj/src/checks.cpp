#include "multipass/checks.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <utility>

#include "multipass/batch.hpp"
#include "multipass/kernel.hpp"
#include "multipass/problem.hpp"
#include "multipass/quadrature.hpp"
#include "multipass/rng.hpp"
#include "multipass/semistoch.hpp"
#include "multipass/sgd.hpp"

namespace multipass {

void CheckReport::add(std::string name, double observed, double limit) {
  CheckItem item;
  item.name = std::move(name);
  item.observed = observed;
  item.limit = limit;
  item.pass = observed <= limit;
  pass = pass && item.pass;
  items.push_back(std::move(item));
}

CheckReport kernel_check(std::uint64_t seed, std::size_t points,
                         double tolerance) {
  CheckReport report;
  report.suite = "kernel";
  const std::pair<double, double> orders[] = {{1.0, 1.0}, {1.5, 2.5}, {2.0, 2.0}};
  Rng rng(seed);
  for (const auto& [q, qp] : orders) {
    const auto kq = shared_evaluator(q);
    const auto kp = shared_evaluator(qp);
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = rng.uniform();
      const double z = rng.uniform();
      const double closed = l2_inner(q, qp, x, z);
      const double quad = l2_inner_quadrature(*kq, *kp, x, z);
      worst = std::max(worst, std::abs(closed - quad));
    }
    char name[64];
    std::snprintf(name, sizeof(name), "convolution_identity_q%.1f_q%.1f", q,
                  qp);
    report.add(name, worst, tolerance);
  }
  return report;
}

CheckReport filter_check(double gamma, std::size_t n, std::uint64_t seed) {
  CheckReport report;
  report.suite = "filter";
  const ProblemSpec spec(2.0, 0.25, 0.2);
  if (gamma == 0.0) gamma = spec.default_gamma();

  const Dataset data = sample_dataset(spec, n, derive_seed({seed, 1}));
  const auto kernel = shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = gram_matrix(*kernel, data.xs);

  for (std::size_t t : {10u, 100u, 1000u}) {
    const BatchTrajectory batch = run_batch_gd(data, gram, gamma, t);
    const Eigen::VectorXd spectral = spectral_solution(gram, data.ys, gamma, t);
    const Eigen::VectorXd& iterative = batch.averaged.back();
    const double scale =
        std::max(iterative.cwiseAbs().maxCoeff(), 1e-300);
    const double rel = (spectral - iterative).cwiseAbs().maxCoeff() / scale;
    report.add("spectral_vs_iterative_t" + std::to_string(t), rel, 1e-8);
  }

  const BatchTrajectory long_run = run_batch_gd(data, gram, gamma, 1000);
  double worst_increase = 0.0;
  for (std::size_t k = 0; k + 1 < long_run.training_mse.size(); ++k)
    worst_increase = std::max(
        worst_increase, long_run.training_mse[k + 1] - long_run.training_mse[k]);
  report.add("batch_mse_monotone", worst_increase,
             1e-12 * long_run.training_mse.front());

  const FilterSpec filter = averaged_gd_filter(gamma, 100);
  std::vector<double> xs;
  const double x_hi = 4.0 * spec.r_squared();
  for (int i = 0; i < 200; ++i)
    xs.push_back(1e-8 * std::pow(x_hi / 1e-8, i / 199.0));
  const FilterCheck fc = check_filter(filter, xs, {0.0, 0.5, 1.0});
  report.add("filter_lambda_q", fc.max_lambda_q, 1.0 + 1e-9);
  report.add("filter_remainder_ratio", fc.max_remainder_ratio, 1.0 + 1e-9);

  // n = 1 degenerate case: every SGD step is the full gradient step, so
  // the raw SGD iterate must match batch GD step for step.
  const Dataset single = sample_dataset(spec, 1, derive_seed({seed, 2}));
  const Eigen::MatrixXd gram1 = gram_matrix(*kernel, single.xs);
  const double gamma1 = spec.default_gamma();
  const BatchTrajectory batch1 = run_batch_gd(single, gram1, gamma1, 200);
  double worst_gap = 0.0;
  for (SamplingVariant variant :
       {SamplingVariant::WithReplacement, SamplingVariant::WithoutReplacement,
        SamplingVariant::Cycle}) {
    SGDConfig cfg;
    cfg.gamma = gamma1;
    cfg.t_max = 200;
    cfg.scheme = variant;
    cfg.seed = derive_seed({seed, 3});
    auto observer = [&](std::size_t u, const Eigen::VectorXd& a,
                        const Eigen::VectorXd&) {
      worst_gap = std::max(worst_gap,
                           std::abs(a[0] - batch1.iterates[u][0]));
    };
    run_sgd(single, gram1, cfg, [](const DualModel&) { return 0.0; },
            observer);
  }
  report.add("sgd_equals_batch_n1", worst_gap, 1e-12);

  return report;
}

CheckReport semistoch_check(std::uint64_t seed, std::size_t reps) {
  CheckReport report;
  report.suite = "semistoch";

  const SemiStochSystem small = SemiStochSystem::power_law(8, 2.0);
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(derive_seed({seed, trial}));
    std::vector<Eigen::VectorXd> noises;
    for (std::size_t t = 0; t < 200; ++t) {
      Eigen::VectorXd xi(small.dim());
      for (Eigen::Index i = 0; i < small.dim(); ++i) xi[i] = rng.normal();
      noises.push_back(std::move(xi));
    }
    const Eigen::VectorXd direct = iterate_semi(small, noises);
    const Eigen::VectorXd closed = closed_form_avg(small, noises);
    worst = std::max(worst, (direct - closed).cwiseAbs().maxCoeff());
  }
  report.add("closed_form_vs_iterative", worst, 1e-12);

  const SemiStochSystem system = SemiStochSystem::power_law(50, 2.0);
  const auto cells = variance_bound_grid(system, {0.0, 1.0}, {10, 100}, reps,
                                         derive_seed({seed, 99}));
  for (const auto& cell : cells) {
    char name[64];
    std::snprintf(name, sizeof(name), "variance_bound_u%.1f_t%zu", cell.u,
                  cell.t);
    report.add(name, cell.estimate, cell.bound);
  }
  return report;
}

}  // namespace multipass

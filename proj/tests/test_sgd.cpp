#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "multipass/problem.hpp"
#include "multipass/rng.hpp"
#include "multipass/sgd.hpp"

using multipass::Dataset;
using multipass::DualModel;
using multipass::ProblemSpec;
using multipass::RiskEvaluator;
using multipass::RunResult;
using multipass::SamplingScheme;
using multipass::SamplingVariant;
using multipass::SGDConfig;

namespace {

std::function<double(const DualModel&)> oracle_for(const RiskEvaluator& risk) {
  return [&risk](const DualModel& m) { return risk(m.coeffs); };
}

RunResult run_with(const Dataset& ds, const Eigen::MatrixXd& gram,
                   const RiskEvaluator& risk, SamplingVariant scheme,
                   double gamma, std::size_t t_max,
                   std::vector<std::size_t> cps, std::uint64_t seed) {
  SGDConfig config;
  config.gamma = gamma;
  config.t_max = t_max;
  config.scheme = scheme;
  config.checkpoints = std::move(cps);
  config.seed = seed;
  return multipass::run_sgd(ds, gram, config, oracle_for(risk));
}

}  // namespace

TEST_CASE("cycle visits indices in dataset order") {
  SamplingScheme scheme(SamplingVariant::Cycle);
  multipass::Rng rng(1);
  std::vector<std::size_t> seen;
  for (int k = 0; k < 9; ++k) seen.push_back(scheme.next_index(3, rng));
  CHECK(seen == std::vector<std::size_t>{0, 1, 2, 0, 1, 2, 0, 1, 2});
}

TEST_CASE("without replacement is a fresh permutation each epoch") {
  SamplingScheme scheme(SamplingVariant::WithoutReplacement);
  multipass::Rng rng(7);
  const std::size_t n = 4;
  std::vector<std::vector<std::size_t>> epochs;
  for (int e = 0; e < 20; ++e) {
    std::vector<std::size_t> epoch;
    for (std::size_t k = 0; k < n; ++k) epoch.push_back(scheme.next_index(n, rng));
    std::vector<std::size_t> sorted = epoch;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
    epochs.push_back(epoch);
  }
  // orders must actually vary across epochs
  bool any_differ = false;
  for (std::size_t e = 1; e < epochs.size(); ++e)
    if (epochs[e] != epochs[0]) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("with replacement draws uniformly") {
  SamplingScheme scheme(SamplingVariant::WithReplacement);
  multipass::Rng rng(5);
  const int draws = 100000;
  int count0 = 0;
  for (int k = 0; k < draws; ++k)
    if (scheme.next_index(2, rng) == 0) ++count0;
  const double freq = static_cast<double>(count0) / draws;
  const double sd = 0.5 / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(freq - 0.5) <= 5.0 * sd);
}

TEST_CASE("average check matches the recursive average") {
  multipass::Rng rng(13);
  std::vector<Eigen::VectorXd> iterates;
  Eigen::VectorXd recursive = Eigen::VectorXd::Zero(7);
  for (int u = 1; u <= 50; ++u) {
    Eigen::VectorXd v(7);
    for (int i = 0; i < 7; ++i) v[i] = rng.normal();
    iterates.push_back(v);
    recursive += (v - recursive) / static_cast<double>(u);
    const Eigen::VectorXd mean = multipass::average_check(iterates);
    CHECK((recursive - mean).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  CHECK(multipass::average_check({iterates[0]}) == iterates[0]);
  const Eigen::VectorXd two = multipass::average_check({iterates[0], iterates[1]});
  CHECK((two - 0.5 * (iterates[0] + iterates[1])).lpNorm<Eigen::Infinity>() <=
        1e-15);
  CHECK_THROWS_AS(multipass::average_check({}), std::invalid_argument);
}

TEST_CASE("single point run follows the scalar closed form") {
  const ProblemSpec spec(3.0, 1.0 / 6.0, 0.0);
  const Dataset ds = multipass::sample_dataset(spec, 1, 21);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);
  const double gamma = spec.default_gamma();
  const double k11 = gram(0, 0);
  const double y1 = ds.ys[0];

  std::vector<Eigen::VectorXd> iterates;
  SGDConfig config;
  config.gamma = gamma;
  config.t_max = 200;
  config.scheme = SamplingVariant::WithReplacement;
  config.checkpoints = {200};
  config.seed = 3;
  const RunResult res = multipass::run_sgd(
      ds, gram, config, oracle_for(risk),
      [&](std::size_t u, const Eigen::VectorXd& a, const Eigen::VectorXd&) {
        const double expected =
            y1 / k11 * (1.0 - std::pow(1.0 - gamma * k11, static_cast<double>(u)));
        CHECK(std::abs(a[0] - expected) <= 1e-12);
        iterates.push_back(a);
      });
  const double expected_raw =
      y1 / k11 * (1.0 - std::pow(1.0 - gamma * k11, 200.0));
  CHECK(std::abs(res.raw_coeffs[0] - expected_raw) <= 1e-12);
  const Eigen::VectorXd mean = multipass::average_check(iterates);
  CHECK(std::abs(res.final_coeffs[0] - mean[0]) <= 1e-12);
}

TEST_CASE("recursive average equals arithmetic mean on a real run") {
  const ProblemSpec spec(2.0, 0.25);
  const Dataset ds = multipass::sample_dataset(spec, 16, 4);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);

  std::vector<Eigen::VectorXd> iterates;
  Eigen::VectorXd last_abar;
  SGDConfig config;
  config.gamma = spec.default_gamma();
  config.t_max = 500;
  config.scheme = SamplingVariant::WithoutReplacement;
  config.checkpoints = {500};
  config.seed = 17;
  multipass::run_sgd(ds, gram, config, oracle_for(risk),
                     [&](std::size_t, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& abar) {
                       iterates.push_back(a);
                       last_abar = abar;
                     });
  const Eigen::VectorXd mean = multipass::average_check(iterates);
  CHECK((last_abar - mean).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("zero step size leaves the model at zero") {
  const ProblemSpec spec(3.0, 1.0 / 6.0);
  const Dataset ds = multipass::sample_dataset(spec, 8, 9);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);

  const RunResult res = run_with(ds, gram, risk, SamplingVariant::Cycle, 0.0,
                                 50, {1, 10, 25, 50}, 2);
  const double zero_risk = risk(Eigen::VectorXd::Zero(8));
  REQUIRE(res.trajectory.size() == 4);
  for (const auto& cp : res.trajectory)
    CHECK(cp.excess == doctest::Approx(zero_risk).epsilon(1e-14));
  CHECK(res.final_coeffs.isZero(0.0));
  CHECK(res.raw_coeffs.isZero(0.0));
  // constant trajectory resolves ties toward the earliest checkpoint
  CHECK(res.t_star == 1);
}

TEST_CASE("sampling schemes coincide when only one point exists") {
  const ProblemSpec spec(2.0, 0.25);
  const Dataset ds = multipass::sample_dataset(spec, 1, 33);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);

  const auto cps = multipass::geometric_checkpoints(300, 1);
  const RunResult w = run_with(ds, gram, risk, SamplingVariant::WithReplacement,
                               spec.default_gamma(), 300, cps, 8);
  const RunResult wo = run_with(ds, gram, risk,
                                SamplingVariant::WithoutReplacement,
                                spec.default_gamma(), 300, cps, 8);
  const RunResult cy = run_with(ds, gram, risk, SamplingVariant::Cycle,
                                spec.default_gamma(), 300, cps, 8);
  REQUIRE(w.trajectory.size() == wo.trajectory.size());
  REQUIRE(w.trajectory.size() == cy.trajectory.size());
  for (std::size_t k = 0; k < w.trajectory.size(); ++k) {
    CHECK(w.trajectory[k].excess == wo.trajectory[k].excess);
    CHECK(w.trajectory[k].excess == cy.trajectory[k].excess);
  }
  CHECK(w.final_coeffs == cy.final_coeffs);
}

TEST_CASE("runs are deterministic in the seed") {
  const ProblemSpec spec(3.0, 1.0 / 6.0);
  const Dataset ds = multipass::sample_dataset(spec, 24, 44);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);
  const auto cps = multipass::geometric_checkpoints(200, 24);

  const RunResult r1 = run_with(ds, gram, risk, SamplingVariant::WithReplacement,
                                spec.default_gamma(), 200, cps, 123);
  const RunResult r2 = run_with(ds, gram, risk, SamplingVariant::WithReplacement,
                                spec.default_gamma(), 200, cps, 123);
  const RunResult r3 = run_with(ds, gram, risk, SamplingVariant::WithReplacement,
                                spec.default_gamma(), 200, cps, 124);
  REQUIRE(r1.trajectory.size() == r2.trajectory.size());
  for (std::size_t k = 0; k < r1.trajectory.size(); ++k) {
    CHECK(r1.trajectory[k].t == r2.trajectory[k].t);
    CHECK(r1.trajectory[k].excess == r2.trajectory[k].excess);
  }
  CHECK(r1.final_coeffs == r2.final_coeffs);
  CHECK(r1.raw_coeffs == r2.raw_coeffs);
  CHECK(r1.final_coeffs != r3.final_coeffs);
}

TEST_CASE("t_star achieves the checkpointed minimum") {
  const ProblemSpec spec(2.0, 0.25);
  const Dataset ds = multipass::sample_dataset(spec, 32, 6);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);

  const auto cps = multipass::geometric_checkpoints(400, 32);
  const RunResult res = run_with(ds, gram, risk, SamplingVariant::WithReplacement,
                                 spec.default_gamma(), 400, cps, 15);
  REQUIRE(res.trajectory.size() == cps.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_t = 0;
  for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
    CHECK(res.trajectory[k].t == cps[k]);
    if (res.trajectory[k].excess < best) {
      best = res.trajectory[k].excess;
      best_t = res.trajectory[k].t;
    }
  }
  CHECK(res.t_star == best_t);
  // training with the default step improves on the zero model
  CHECK(best < risk(Eigen::VectorXd::Zero(32)));
}

TEST_CASE("geometric checkpoints are increasing and anchored") {
  const auto cps = multipass::geometric_checkpoints(1000, 37);
  REQUIRE(!cps.empty());
  CHECK(cps.front() == 1);
  CHECK(cps.back() == 1000);
  CHECK(std::find(cps.begin(), cps.end(), 37) != cps.end());
  for (std::size_t k = 1; k < cps.size(); ++k) {
    CHECK(cps[k] > cps[k - 1]);
    // spacing never exceeds the geometric ratio (up to integer rounding)
    CHECK(cps[k] <= std::max(cps[k - 1] + 1,
                             static_cast<std::size_t>(
                                 std::ceil(1.1 * static_cast<double>(cps[k - 1])))));
  }

  // n beyond the budget is not inserted
  const auto small = multipass::geometric_checkpoints(10, 50);
  CHECK(small.back() == 10);
  CHECK(std::find(small.begin(), small.end(), 50) == small.end());

  CHECK_THROWS_AS(multipass::geometric_checkpoints(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(multipass::geometric_checkpoints(10, 1, 1.0),
                  std::invalid_argument);
}

TEST_CASE("run_sgd validates inputs") {
  const ProblemSpec spec(2.0, 0.25);
  const Dataset ds = multipass::sample_dataset(spec, 4, 1);
  auto kernel = multipass::shared_evaluator(spec.alpha);
  const Eigen::MatrixXd gram = multipass::gram_matrix(*kernel, ds.xs);
  const RiskEvaluator risk(spec, ds.xs);
  const auto oracle = oracle_for(risk);

  SGDConfig config;
  config.gamma = 0.1;
  config.t_max = 10;
  config.checkpoints = {1, 5, 10};

  Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(multipass::run_sgd(ds, wrong, config, oracle),
                  std::invalid_argument);

  SGDConfig bad = config;
  bad.gamma = -0.1;
  CHECK_THROWS_AS(multipass::run_sgd(ds, gram, bad, oracle),
                  std::invalid_argument);

  bad = config;
  bad.t_max = 0;
  CHECK_THROWS_AS(multipass::run_sgd(ds, gram, bad, oracle),
                  std::invalid_argument);

  bad = config;
  bad.checkpoints = {5, 5};
  CHECK_THROWS_AS(multipass::run_sgd(ds, gram, bad, oracle),
                  std::invalid_argument);

  bad = config;
  bad.checkpoints = {0, 5};
  CHECK_THROWS_AS(multipass::run_sgd(ds, gram, bad, oracle),
                  std::invalid_argument);

  bad = config;
  bad.checkpoints = {5, 11};
  CHECK_THROWS_AS(multipass::run_sgd(ds, gram, bad, oracle),
                  std::invalid_argument);

  Dataset empty = ds;
  empty.xs.clear();
  empty.ys.resize(0);
  CHECK_THROWS_AS(multipass::run_sgd(empty, gram, config, oracle),
                  std::invalid_argument);
}

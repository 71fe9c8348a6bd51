#ifndef MULTIPASS_SGD_HPP
#define MULTIPASS_SGD_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "multipass/problem.hpp"
#include "multipass/rng.hpp"

namespace multipass {

enum class SamplingVariant { WithReplacement, WithoutReplacement, Cycle };

// Index stream over {0..n-1}. WithReplacement draws i.i.d. uniform;
// WithoutReplacement draws a fresh uniform permutation at each epoch
// boundary and walks it; Cycle walks 0..n-1 repeatedly in dataset order.
class SamplingScheme {
 public:
  explicit SamplingScheme(SamplingVariant variant) : variant_(variant) {}

  SamplingVariant variant() const { return variant_; }
  std::size_t next_index(std::size_t n, Rng& rng);

 private:
  SamplingVariant variant_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_ = 0;
};

struct SGDConfig {
  double gamma = 0.0;  // step size, >= 0 (zero keeps coefficients at zero)
  std::size_t t_max = 0;
  SamplingVariant scheme = SamplingVariant::WithReplacement;
  std::vector<std::size_t> checkpoints;  // strictly increasing, in [1, t_max]
  std::uint64_t seed = 0;
};

struct CheckpointRisk {
  std::size_t t = 0;
  double excess = 0.0;
};

struct RunResult {
  std::vector<CheckpointRisk> trajectory;
  std::size_t t_star = 0;  // checkpoint with minimal excess, ties to smallest
  Eigen::VectorXd final_coeffs;  // averaged dual coefficients at t_max
  Eigen::VectorXd raw_coeffs;    // last (unaveraged) iterate at t_max
};

// Optional per-step instrumentation: (u, iterate, running average).
using StepObserver =
    std::function<void(std::size_t, const Eigen::VectorXd&,
                       const Eigen::VectorXd&)>;

// Multi-pass averaged stochastic gradient descent in dual coordinates.
// Per step u = 1..t_max with sampled index i:
//   residual = y_i - (row i of gram) . a
//   a_i     += gamma * residual
//   abar     = (1 - 1/u) abar + a / u
// The trajectory records risk_oracle on the averaged coefficients at each
// configured checkpoint. Deterministic given config.seed.
RunResult run_sgd(const Dataset& dataset, const Eigen::MatrixXd& gram,
                  const SGDConfig& config,
                  const std::function<double(const DualModel&)>& risk_oracle,
                  const StepObserver& observer = {});

// Arithmetic mean of the given iterates; test oracle for the engine's
// recursive averaging.
Eigen::VectorXd average_check(const std::vector<Eigen::VectorXd>& iterates);

// Geometric checkpoint grid: 1 = t_0 < t_1 < ... <= t_max with
// t_{k+1} = max(t_k + 1, ceil(ratio t_k)), always including t_max and,
// when n <= t_max, the single-pass budget t = n.
std::vector<std::size_t> geometric_checkpoints(std::size_t t_max,
                                               std::size_t n,
                                               double ratio = 1.1);

}  // namespace multipass

#endif

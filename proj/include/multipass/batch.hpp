#ifndef MULTIPASS_BATCH_HPP
#define MULTIPASS_BATCH_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

#include "multipass/problem.hpp"

namespace multipass {

// Full trajectory of batch gradient descent in dual coordinates.
// Conventions: iterates[k] = b_k with b_0 = 0 and
//   b_k = b_{k-1} + (gamma/n)(y - K b_{k-1});
// averaged[k-1] = mean of b_0..b_{k-1} (k terms, including the zero start),
// which is the average the spectral filter below reproduces exactly;
// training_mse[k] = ||y - K b_k||^2 / n for the non-averaged iterate.
struct BatchTrajectory {
  std::vector<Eigen::VectorXd> iterates;  // size t + 1
  std::vector<Eigen::VectorXd> averaged;  // size t
  std::vector<double> training_mse;       // size t + 1
  double max_eigenvalue = 0.0;            // of gram / n
  bool step_size_exceeded = false;        // gamma * max_eigenvalue > 1
};

// Runs t batch GD steps. Emits a warning (and sets step_size_exceeded)
// when gamma exceeds 1 / lambda_max(gram / n), under which the training
// MSE of the raw iterate is no longer guaranteed to be non-increasing.
BatchTrajectory run_batch_gd(const Dataset& dataset,
                             const Eigen::MatrixXd& gram, double gamma,
                             std::size_t t);

// Spectral filter of t-step averaged batch GD:
//   q_eta(x) = (1 - (1 - (1 - gamma x)^t) / (gamma t x)) / x,
// evaluated stably: a 4-term series below gamma*t*x < 1e-3 (covers the
// x -> 0 limit gamma (t-1)/2), expm1/log1p arithmetic above. t >= 2.
double q_eta(double x, double gamma, std::size_t t);

// Averaged batch GD solution computed in closed form: with
// K/n = U D U', returns U q_eta(D) U' y / n. Equals the iterative
// averaged[t-1] up to round-off.
Eigen::VectorXd spectral_solution(const Eigen::MatrixXd& gram,
                                  const Eigen::VectorXd& y, double gamma,
                                  std::size_t t);

// A spectral regularization filter: the scalar reconstruction function q,
// its regularization level lambda, and the constant c_q that bounds
//   lambda q(x) <= c_q   and   (1 - x q(x)) x^u <= c_q lambda^u.
struct FilterSpec {
  std::function<double(double)> q;
  double lambda = 0.0;
  double c_q = 1.0;

  double remainder(double x) const { return 1.0 - x * q(x); }
};

// The filter realized by t-step averaged GD with step gamma:
// q = q_eta, lambda = 1/(gamma t), c_q = 1.
FilterSpec averaged_gd_filter(double gamma, std::size_t t);

struct FilterCheck {
  double max_lambda_q = 0.0;        // max over x of lambda q(x)
  double max_remainder_ratio = 0.0; // max over (x,u) of r(x) x^u / lambda^u
  bool pass = false;                // both maxima <= c_q (small slack)
};

// Evaluates the filter-definition inequalities on sampled points xs > 0
// and exponents us in [0, 1].
FilterCheck check_filter(const FilterSpec& filter,
                         const std::vector<double>& xs,
                         const std::vector<double>& us);

}  // namespace multipass

#endif

#ifndef MULTIPASS_PROBLEM_HPP
#define MULTIPASS_PROBLEM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "multipass/kernel.hpp"

namespace multipass {

// Synthetic kernel least-squares problem on the unit circle. Inputs are
// uniform on [0,1), the hypothesis kernel is Lambda_alpha, and the target is
// f*(x) = Lambda_{r alpha + 1/2}(x - 0), so r controls how well f* is
// approximated within the hypothesis space.
struct ProblemSpec {
  double alpha;  // kernel order (eigenvalue decay exponent), > 1
  double r;      // target smoothness relative to the kernel, > 0
  double sigma;  // observation noise level, >= 0

  explicit ProblemSpec(double alpha, double r, double sigma = 0.2);

  double target_order() const { return r * alpha + 0.5; }
  double r_squared() const { return 2.0 * zeta(alpha); }  // sup_x k(x, x)
  double mu() const { return 1.0 / alpha; }
  double default_gamma() const { return 1.0 / (4.0 * r_squared()); }
  // low-smoothness regime where extra optimization passes improve the rate
  bool hard() const { return r <= (alpha - 1.0) / (2.0 * alpha); }
};

struct Dataset {
  ProblemSpec spec;
  std::vector<double> xs;
  Eigen::VectorXd ys;
  std::uint64_t seed = 0;
};

// Kernel expansion f(x) = sum_i coeffs[i] Lambda_order(x - anchors[i]).
struct DualModel {
  std::vector<double> anchors;
  Eigen::VectorXd coeffs;
  double order = 0.0;
};

// Draws n inputs uniformly on [0,1), then y_i = f*(x_i) + sigma g_i with
// standard Gaussian g_i. When target_order <= 1 an input within machine
// epsilon of the target singularity is redrawn. Deterministic in
// (spec, n, seed).
Dataset sample_dataset(const ProblemSpec& spec, std::size_t n,
                       std::uint64_t seed);

// f*(x) = Lambda_{target_order}(x). Throws divergent_point_error at
// x == 0 (mod 1) when target_order <= 1.
double target_eval(const ProblemSpec& spec, double x);

// Precomputed quadratic form for the exact excess risk of dual models on a
// fixed anchor set:
//   risk(a) = a' M a - 2 a' v + c
//   M_ij = Lambda_{2 alpha}(x_i - x_j), v_i = Lambda_{alpha + tau}(x_i),
//   c = 2 zeta(2 r alpha + 1), with tau = target_order.
// Build once per anchor set and reuse along an optimization trajectory.
class RiskEvaluator {
 public:
  RiskEvaluator(const ProblemSpec& spec, const std::vector<double>& anchors);

  double operator()(const Eigen::VectorXd& coeffs) const;

  const Eigen::MatrixXd& pair_matrix() const { return m2_; }
  const Eigen::VectorXd& cross_vector() const { return v_; }
  double constant() const { return c_; }

 private:
  Eigen::MatrixXd m2_;
  Eigen::VectorXd v_;
  double c_ = 0.0;
};

// Exact excess risk E(f) - E(f*) = ||f - f*||^2_{L2(uniform)} of a dual
// model. Throws invalid_order_error unless model.order == spec.alpha.
double excess_risk(const DualModel& model, const ProblemSpec& spec);

struct MonteCarloRisk {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of the excess risk from m >= 100 uniform draws,
// with the standard error of the estimate. Depends only on the target,
// never on the noise level.
MonteCarloRisk excess_risk_mc(const DualModel& model, const ProblemSpec& spec,
                              std::size_t m, std::uint64_t seed);

}  // namespace multipass

#endif

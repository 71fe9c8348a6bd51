#ifndef MULTIPASS_KERNEL_HPP
#define MULTIPASS_KERNEL_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace multipass {

struct invalid_order_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct divergent_point_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Riemann zeta for q > 1, absolute error <= 1e-10 (Euler-Maclaurin).
double zeta(double q);

enum class KernelStrategy { Auto, ClosedForm, Tabulated, Direct };

struct TabulationParams {
  std::size_t grid_size = std::size_t{1} << 20;  // power of two
  std::size_t truncation = std::size_t{1} << 23;
};

// Evaluator for the periodic kernel
//   Lambda_q(u) = sum_{k != 0} e^{2 pi i k u} / |k|^q = 2 sum_{k>=1} cos(2 pi k u) / k^q,
// 1-periodic and symmetric about 1/2. Finite at u = 0 only for q > 1.
//
// Strategies:
//   ClosedForm  q = 1 (log-sine) or even integer <= 8 (Bernoulli polynomial); exact.
//   Tabulated   truncated Fourier coefficients folded onto a uniform grid, one
//               DFT, then linear interpolation. Exact at grid points for the
//               truncated series. For q < 3 interpolation degrades near the
//               singularity, so within 64 grid cells of u == 0 (mod 1) the
//               evaluator switches to an asymptotic small-u expansion
//               (relative error ~1e-14 there); u == 0 itself returns
//               2 zeta(q) exactly when q > 1.
//   Direct      truncated summation with a rotation recurrence for the cosines;
//               the k^{-q} coefficient table is cached lazily for reuse.
//
// Truncation tail obeys |sum_{k>K}| <= 2 K^{-q} / |sin(pi u)| away from the
// singularity; worst_case_bound() reports the bound at a given point.
// Immutable after construction; safe to share across threads.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(double q,
                           KernelStrategy strategy = KernelStrategy::Auto,
                           TabulationParams params = TabulationParams{});
  ~KernelEvaluator();
  KernelEvaluator(KernelEvaluator&&) noexcept;
  KernelEvaluator& operator=(KernelEvaluator&&) noexcept;
  KernelEvaluator(const KernelEvaluator&) = delete;
  KernelEvaluator& operator=(const KernelEvaluator&) = delete;

  double order() const { return q_; }
  KernelStrategy strategy() const { return strategy_; }  // resolved, never Auto
  const TabulationParams& params() const { return params_; }

  // Lambda_q(u). Throws divergent_point_error when q <= 1 and u is within
  // machine epsilon of an integer.
  double operator()(double u) const;

  // Absolute error bound of this evaluator at u versus the full series.
  double worst_case_bound(double u) const;

 private:
  struct Impl;
  double q_;
  KernelStrategy strategy_;
  TabulationParams params_;
  std::unique_ptr<Impl> impl_;
};

// Shared evaluator cache keyed by (q, strategy, params); avoids rebuilding
// the 2^20-point table for orders that recur across runs.
std::shared_ptr<const KernelEvaluator> shared_evaluator(
    double q, KernelStrategy strategy = KernelStrategy::Auto,
    TabulationParams params = TabulationParams{});

// K[i][j] = Lambda_q(x_i - x_j). Requires q > 1 (finite diagonal).
Eigen::MatrixXd gram_matrix(const KernelEvaluator& evaluator,
                            const std::vector<double>& xs);

// <Lambda_q(x,.), Lambda_{q'}(z,.)>_{L2(uniform)} = Lambda_{q+q'}(x - z).
double l2_inner(double q, double q_prime, double x, double z);

}  // namespace multipass

#endif

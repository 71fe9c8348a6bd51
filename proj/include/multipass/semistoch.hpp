#ifndef MULTIPASS_SEMISTOCH_HPP
#define MULTIPASS_SEMISTOCH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace multipass {

// Finite-dimensional testbed for the averaged-SGD variance analysis:
// a PSD curvature matrix H, step size gamma, noise scale sigma2 with
// E[xi xi'] = sigma2 H, and the decay exponent alpha entering tr H^{1/alpha}.
// The constructor validates gamma lambda_max(H) <= 1 and
// gamma tr H <= 1/4 (the built-in data generator has ||z||^2 = tr H).
class SemiStochSystem {
 public:
  SemiStochSystem(const Eigen::MatrixXd& h, double gamma, double sigma2,
                  double alpha);

  // H = diag(m^{-alpha}), m = 1..d, with gamma = 1/(4 tr H).
  static SemiStochSystem power_law(Eigen::Index d, double alpha,
                                   double sigma2 = 1.0);

  Eigen::Index dim() const { return eigenvalues_.size(); }
  const Eigen::MatrixXd& h() const { return h_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double gamma() const { return gamma_; }
  double sigma2() const { return sigma2_; }
  double alpha() const { return alpha_; }
  double trace() const { return eigenvalues_.sum(); }
  double trace_pow(double p) const;

 private:
  Eigen::MatrixXd h_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;  // ascending, clamped at zero
  double gamma_ = 0.0;
  double sigma2_ = 0.0;
  double alpha_ = 0.0;
};

// Averaged iterate of the semi-stochastic recursion
//   mu_t = (I - gamma H) mu_{t-1} + gamma xi_t,  mu_0 = 0,
// driven by the given noise vectors: returns (1/t) sum_{u=1..t} mu_u.
Eigen::VectorXd iterate_semi(const SemiStochSystem& system,
                             const std::vector<Eigen::VectorXd>& noises);

// The same average in closed form:
//   (1/t) sum_{k=1..t} H^{-1}(I - (I - gamma H)^{t-k+1}) xi_k,
// applied via the eigendecomposition; a zero eigenvalue contributes its
// limit gamma (t-k+1) on that eigendirection.
Eigen::VectorXd closed_form_avg(const SemiStochSystem& system,
                                const std::vector<Eigen::VectorXd>& noises);

struct VarianceCheck {
  double u = 0.0;
  std::size_t t = 0;
  double estimate = 0.0;   // Monte Carlo mean of ||H^{u/2} mu_bar_t||^2
  double std_error = 0.0;  // standard error of the estimate
  double bound = 0.0;      // 4 sigma2 gamma^{1-u} gamma^{1/a} trH^{1/a} / t^{u-1/a}
  bool pass = false;       // estimate <= bound
};

// Monte Carlo check of the averaged-SGD variance bound on the fully
// stochastic recursion mu_t = (I - gamma z_t z_t') mu_{t-1} + gamma xi_t.
// The generators saturate the assumed moment bounds: z = sqrt(tr H) v_j
// with eigenvector v_j drawn with probability lambda_j / tr H (so
// E[(z z')^2] = tr H * H exactly), and xi = sqrt(sigma2) H^{1/2} g.
// Exponents u must lie in [0, 1/alpha + 1]. ts must be strictly
// increasing; one trajectory per replication is checkpointed at every t,
// so cells share randomness but each cell is an unbiased estimate.
std::vector<VarianceCheck> variance_bound_grid(
    const SemiStochSystem& system, const std::vector<double>& us,
    const std::vector<std::size_t>& ts, std::size_t reps, std::uint64_t seed);

VarianceCheck variance_bound_check(const SemiStochSystem& system, double u,
                                   std::size_t t, std::size_t reps,
                                   std::uint64_t seed);

}  // namespace multipass

#endif

#ifndef MULTIPASS_DIAGNOSTICS_HPP
#define MULTIPASS_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <string>

namespace multipass {

// Effective dimension of a spectrum at regularization level lambda:
//   N(lambda) = sum_m eig_m / (eig_m + lambda).
// Monotone non-increasing in lambda; bounded by the number of nonzero
// eigenvalues. Requires eigs >= 0 and lambda > 0.
double effective_dimension(const Eigen::VectorXd& eigs, double lambda);

struct SpectrumFit {
  double alpha_hat = 0.0;   // negative slope of log eig_m vs log m
  std::size_t m_lo = 0;     // fitted index window, 1-based inclusive
  std::size_t m_hi = 0;
  double fit_quality = 0.0; // coefficient of determination of the fit
};

// Least-squares fit of a power-law decay exponent on the index window
// [m_lo, m_hi] (1-based) of a descending spectrum. Requires m_lo >= 2,
// at least 8 strictly positive eigenvalues in the window. The default
// window [3, n/4] avoids the spectrum head (kernel-specific constants)
// and tail (finite-sample noise floor).
SpectrumFit fit_alpha(const Eigen::VectorXd& eigs, std::size_t m_lo,
                      std::size_t m_hi);
SpectrumFit fit_alpha(const Eigen::VectorXd& eigs);

struct SourceFit {
  double r_hat = 0.0;
  double beta_hat = 0.0;  // decay exponent of the squared coefficients
};

// Source-smoothness estimate from the decay of squared basis
// coefficients: beta_hat fits coeff_m^2 ~ m^{-beta} over the strictly
// positive entries, then r_hat = clamp((alpha_hat + beta_hat - 1) /
// (2 alpha_hat), 0, 1). A target carried by a single eigendirection has
// no decay to fit; it is reported as beta_hat = infinity, r_hat = 1.
// Requires alpha_hat > 1 and at least one positive squared coefficient.
SourceFit fit_r(const Eigen::VectorXd& eigs,
                const Eigen::VectorXd& coefficients, double alpha_hat);

struct SpectrumProjection {
  Eigen::VectorXd eigs;          // of (1/n) X'X, sorted descending
  Eigen::VectorXd coefficients;  // minimum-norm solution in the eigenbasis
  Eigen::VectorXd solution;      // the minimum-norm solution itself
};

// Empirical second-moment analysis of a feature matrix (rows = samples):
// eigendecomposes (1/n) X'X, solves least squares by pseudo-inverse
// (eigenvalues below 1e-12 * lambda_max are treated as zero), and
// projects the solution on the eigenbasis.
SpectrumProjection ingest_features(const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& labels);

// Numeric matrix from delimited text, one row per line. Blank lines are
// skipped; ragged or non-numeric rows raise std::runtime_error.
Eigen::MatrixXd read_csv_matrix(const std::string& path, char delimiter = ',');

}  // namespace multipass

#endif

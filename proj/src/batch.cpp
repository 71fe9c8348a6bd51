#include "multipass/batch.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace multipass {

BatchTrajectory run_batch_gd(const Dataset& dataset,
                             const Eigen::MatrixXd& gram, double gamma,
                             std::size_t t) {
  const auto n = static_cast<Eigen::Index>(dataset.xs.size());
  if (n == 0) throw std::invalid_argument("dataset is empty");
  if (dataset.ys.size() != n)
    throw std::invalid_argument("dataset xs/ys size mismatch");
  if (gram.rows() != n || gram.cols() != n)
    throw std::invalid_argument("gram matrix does not match dataset size");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (t == 0) throw std::invalid_argument("t must be positive");

  BatchTrajectory traj;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram /
                                                    static_cast<double>(n));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gram eigendecomposition failed");
  traj.max_eigenvalue = es.eigenvalues().maxCoeff();
  traj.step_size_exceeded = gamma * traj.max_eigenvalue > 1.0;
  if (traj.step_size_exceeded)
    std::cerr << "warning: gamma " << gamma
              << " exceeds 1/lambda_max = " << 1.0 / traj.max_eigenvalue
              << "; training error may oscillate\n";

  const double scale = gamma / static_cast<double>(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd bavg = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd residual = dataset.ys;

  traj.iterates.reserve(t + 1);
  traj.averaged.reserve(t);
  traj.training_mse.reserve(t + 1);
  traj.iterates.push_back(b);
  traj.training_mse.push_back(residual.squaredNorm() / static_cast<double>(n));
  for (std::size_t k = 1; k <= t; ++k) {
    bavg += (b - bavg) / static_cast<double>(k);
    traj.averaged.push_back(bavg);
    b += scale * residual;
    residual = dataset.ys - gram * b;
    traj.iterates.push_back(b);
    traj.training_mse.push_back(residual.squaredNorm() /
                                static_cast<double>(n));
  }
  return traj;
}

double q_eta(double x, double gamma, std::size_t t) {
  if (t < 2) throw std::invalid_argument("q_eta requires t >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("x must be nonnegative");
  const double td = static_cast<double>(t);
  const double gx = gamma * x;
  if (gamma * td * x < 1e-3) {
    const double c2 = (td - 1.0) / 2.0;
    const double c3 = c2 * (td - 2.0) / 3.0;
    const double c4 = c3 * (td - 3.0) / 4.0;
    const double c5 = c4 * (td - 4.0) / 5.0;
    return gamma * (c2 - gx * (c3 - gx * (c4 - gx * c5)));
  }
  double shrink;  // 1 - (1 - gamma x)^t, computed without cancellation
  if (gx <= 1.0)
    shrink = -std::expm1(td * std::log1p(-gx));
  else
    shrink = 1.0 - std::pow(1.0 - gx, td);
  return (1.0 - shrink / (gamma * td * x)) / x;
}

Eigen::VectorXd spectral_solution(const Eigen::MatrixXd& gram,
                                  const Eigen::VectorXd& y, double gamma,
                                  std::size_t t) {
  const auto n = gram.rows();
  if (n == 0 || gram.cols() != n)
    throw std::invalid_argument("gram matrix must be square and nonempty");
  if (y.size() != n)
    throw std::invalid_argument("label vector does not match gram size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram /
                                                    static_cast<double>(n));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gram eigendecomposition failed");
  Eigen::VectorXd filtered(n);
  for (Eigen::Index i = 0; i < n; ++i)
    filtered[i] = q_eta(std::max(0.0, es.eigenvalues()[i]), gamma, t);
  const Eigen::VectorXd projected =
      es.eigenvectors().transpose() * (y / static_cast<double>(n));
  return es.eigenvectors() * filtered.cwiseProduct(projected).eval();
}

FilterSpec averaged_gd_filter(double gamma, std::size_t t) {
  if (t < 2) throw std::invalid_argument("filter requires t >= 2");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  FilterSpec spec;
  spec.q = [gamma, t](double x) { return q_eta(x, gamma, t); };
  spec.lambda = 1.0 / (gamma * static_cast<double>(t));
  spec.c_q = 1.0;
  return spec;
}

FilterCheck check_filter(const FilterSpec& filter,
                         const std::vector<double>& xs,
                         const std::vector<double>& us) {
  FilterCheck result;
  for (double x : xs) {
    if (!(x > 0.0))
      throw std::invalid_argument("filter check requires positive x samples");
    const double qx = filter.q(x);
    result.max_lambda_q = std::max(result.max_lambda_q, filter.lambda * qx);
    const double rx = 1.0 - x * qx;
    for (double u : us) {
      const double ratio =
          rx * std::pow(x, u) / std::pow(filter.lambda, u);
      result.max_remainder_ratio = std::max(result.max_remainder_ratio, ratio);
    }
  }
  const double slack = 1.0 + 1e-9;
  result.pass = result.max_lambda_q <= filter.c_q * slack &&
                result.max_remainder_ratio <= filter.c_q * slack;
  return result;
}

}  // namespace multipass

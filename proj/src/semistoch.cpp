#include "multipass/semistoch.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "multipass/rng.hpp"

namespace multipass {

namespace {

// (1 - (1 - g h)^p) / h without cancellation; h -> 0 limit is g p.
double shrink_coef(double h, double g, double p) {
  if (h <= 0.0) return g * p;
  return -std::expm1(p * std::log1p(-g * h)) / h;
}

}  // namespace

SemiStochSystem::SemiStochSystem(const Eigen::MatrixXd& h, double gamma,
                                 double sigma2, double alpha)
    : h_(h), gamma_(gamma), sigma2_(sigma2), alpha_(alpha) {
  if (h.rows() == 0 || h.rows() != h.cols())
    throw std::invalid_argument("H must be square and nonempty");
  if ((h - h.transpose()).lpNorm<Eigen::Infinity>() >
      1e-12 * (1.0 + h.lpNorm<Eigen::Infinity>()))
    throw std::invalid_argument("H must be symmetric");
  if (!(sigma2 >= 0.0))
    throw std::invalid_argument("sigma2 must be nonnegative");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("H eigendecomposition failed");
  eigenvectors_ = es.eigenvectors();
  eigenvalues_ = es.eigenvalues();
  const double top = eigenvalues_.maxCoeff();
  if (eigenvalues_.minCoeff() < -1e-10 * std::max(1.0, top))
    throw std::invalid_argument("H must be positive semidefinite");
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (gamma * top > 1.0)
    throw std::invalid_argument("gamma exceeds 1 / lambda_max(H)");
  if (gamma * eigenvalues_.sum() > 0.25 + 1e-12)
    throw std::invalid_argument("gamma exceeds 1 / (4 tr H)");
}

SemiStochSystem SemiStochSystem::power_law(Eigen::Index d, double alpha,
                                           double sigma2) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  Eigen::VectorXd eigs(d);
  for (Eigen::Index m = 0; m < d; ++m)
    eigs[m] = std::pow(static_cast<double>(m + 1), -alpha);
  const Eigen::MatrixXd h = eigs.asDiagonal();
  return SemiStochSystem(h, 1.0 / (4.0 * eigs.sum()), sigma2, alpha);
}

double SemiStochSystem::trace_pow(double p) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i)
    if (eigenvalues_[i] > 0.0) acc += std::pow(eigenvalues_[i], p);
  return acc;
}

Eigen::VectorXd iterate_semi(const SemiStochSystem& system,
                             const std::vector<Eigen::VectorXd>& noises) {
  if (noises.empty())
    throw std::invalid_argument("at least one noise vector is required");
  const Eigen::Index d = system.dim();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d);
  double count = 0.0;
  for (const auto& xi : noises) {
    if (xi.size() != d)
      throw std::invalid_argument("noise dimension does not match H");
    mu += system.gamma() * (xi - system.h() * mu);
    count += 1.0;
    avg += (mu - avg) / count;
  }
  return avg;
}

Eigen::VectorXd closed_form_avg(const SemiStochSystem& system,
                                const std::vector<Eigen::VectorXd>& noises) {
  if (noises.empty())
    throw std::invalid_argument("at least one noise vector is required");
  const Eigen::Index d = system.dim();
  const double t = static_cast<double>(noises.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < noises.size(); ++k) {
    if (noises[k].size() != d)
      throw std::invalid_argument("noise dimension does not match H");
    const double p = t - static_cast<double>(k);  // t - (k+1) + 1
    const Eigen::VectorXd projected =
        system.eigenvectors().transpose() * noises[k];
    for (Eigen::Index i = 0; i < d; ++i)
      acc[i] += shrink_coef(system.eigenvalues()[i], system.gamma(), p) *
                projected[i];
  }
  return system.eigenvectors() * (acc / t).eval();
}

std::vector<VarianceCheck> variance_bound_grid(
    const SemiStochSystem& system, const std::vector<double>& us,
    const std::vector<std::size_t>& ts, std::size_t reps, std::uint64_t seed) {
  const double u_max = 1.0 / system.alpha() + 1.0;
  for (double u : us)
    if (!(u >= 0.0 && u <= u_max + 1e-12)) {
      std::ostringstream msg;
      msg << "exponent u must lie in [0, " << u_max << "], got " << u;
      throw std::invalid_argument(msg.str());
    }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] == 0) throw std::invalid_argument("t must be positive");
    if (k > 0 && ts[k] <= ts[k - 1])
      throw std::invalid_argument("ts must be strictly increasing");
  }
  if (ts.empty() || us.empty())
    throw std::invalid_argument("us and ts must be nonempty");
  if (reps == 0) throw std::invalid_argument("reps must be positive");

  const Eigen::Index d = system.dim();
  const double trace = system.trace();
  const double g = system.gamma();
  const double sigma = std::sqrt(system.sigma2());

  // eigenbasis coordinates throughout: H acts as diag(eigenvalues)
  Eigen::VectorXd cumulative(d);
  double running = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    running += system.eigenvalues()[i] / trace;
    cumulative[i] = running;
  }
  Eigen::VectorXd sqrt_eigs = system.eigenvalues().cwiseSqrt();
  Eigen::MatrixXd eig_pow(d, static_cast<Eigen::Index>(us.size()));
  for (std::size_t j = 0; j < us.size(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const double lam = system.eigenvalues()[i];
      eig_pow(i, static_cast<Eigen::Index>(j)) =
          (lam > 0.0) ? std::pow(lam, us[j]) : (us[j] == 0.0 ? 1.0 : 0.0);
    }

  const std::size_t cells = us.size() * ts.size();
  std::vector<double> sum(cells, 0.0), sum_sq(cells, 0.0);
  Eigen::VectorXd mu(d), avg(d);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    Rng rng(derive_seed({seed, rep}));
    mu.setZero();
    avg.setZero();
    std::size_t next_t = 0;
    for (std::size_t step = 1; step <= ts.back(); ++step) {
      // z = sqrt(tr H) v_j, so (I - g z z') mu only rescales coordinate j
      const double pick = rng.uniform();
      Eigen::Index j = 0;
      while (j + 1 < d && cumulative[j] < pick) ++j;
      mu[j] -= g * trace * mu[j];
      for (Eigen::Index i = 0; i < d; ++i)
        mu[i] += g * sigma * sqrt_eigs[i] * rng.normal();
      avg += (mu - avg) / static_cast<double>(step);
      if (next_t < ts.size() && ts[next_t] == step) {
        for (std::size_t uj = 0; uj < us.size(); ++uj) {
          double norm2 = 0.0;
          for (Eigen::Index i = 0; i < d; ++i)
            norm2 += eig_pow(i, static_cast<Eigen::Index>(uj)) * avg[i] * avg[i];
          const std::size_t cell = uj * ts.size() + next_t;
          sum[cell] += norm2;
          sum_sq[cell] += norm2 * norm2;
        }
        ++next_t;
      }
    }
  }

  std::vector<VarianceCheck> checks;
  checks.reserve(cells);
  const double n = static_cast<double>(reps);
  for (std::size_t uj = 0; uj < us.size(); ++uj)
    for (std::size_t tj = 0; tj < ts.size(); ++tj) {
      const std::size_t cell = uj * ts.size() + tj;
      VarianceCheck check;
      check.u = us[uj];
      check.t = ts[tj];
      check.estimate = sum[cell] / n;
      const double var = std::max(
          0.0, (sum_sq[cell] - n * check.estimate * check.estimate) /
                   std::max(1.0, n - 1.0));
      check.std_error = std::sqrt(var / n);
      const double td = static_cast<double>(ts[tj]);
      const double inv_a = 1.0 / system.alpha();
      check.bound = 4.0 * system.sigma2() * std::pow(g, 1.0 - check.u) *
                    std::pow(g, inv_a) * system.trace_pow(inv_a) /
                    std::pow(td, check.u - inv_a);
      check.pass = check.estimate <= check.bound;
      checks.push_back(check);
    }
  return checks;
}

VarianceCheck variance_bound_check(const SemiStochSystem& system, double u,
                                   std::size_t t, std::size_t reps,
                                   std::uint64_t seed) {
  return variance_bound_grid(system, {u}, {t}, reps, seed).front();
}

}  // namespace multipass

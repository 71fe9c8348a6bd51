#include "multipass/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace multipass {

std::size_t SamplingScheme::next_index(std::size_t n, Rng& rng) {
  switch (variant_) {
    case SamplingVariant::WithReplacement:
      return rng.uniform_index(n);
    case SamplingVariant::WithoutReplacement:
      if (cursor_ == perm_.size()) {
        if (perm_.size() != n) {
          perm_.resize(n);
          std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        }
        rng.shuffle(perm_);
        cursor_ = 0;
      }
      return perm_[cursor_++];
    case SamplingVariant::Cycle: {
      const std::size_t i = cursor_;
      cursor_ = (cursor_ + 1 == n) ? 0 : cursor_ + 1;
      return i;
    }
  }
  throw std::logic_error("unknown sampling variant");
}

RunResult run_sgd(const Dataset& dataset, const Eigen::MatrixXd& gram,
                  const SGDConfig& config,
                  const std::function<double(const DualModel&)>& risk_oracle,
                  const StepObserver& observer) {
  const std::size_t n = dataset.xs.size();
  if (n == 0) throw std::invalid_argument("dataset is empty");
  if (static_cast<std::size_t>(dataset.ys.size()) != n)
    throw std::invalid_argument("dataset xs/ys size mismatch");
  if (static_cast<std::size_t>(gram.rows()) != n ||
      static_cast<std::size_t>(gram.cols()) != n)
    throw std::invalid_argument("gram matrix does not match dataset size");
  if (!(config.gamma >= 0.0))
    throw std::invalid_argument("gamma must be nonnegative");
  if (config.t_max == 0) throw std::invalid_argument("t_max must be positive");
  for (std::size_t k = 0; k < config.checkpoints.size(); ++k) {
    const std::size_t t = config.checkpoints[k];
    if (t < 1 || t > config.t_max)
      throw std::invalid_argument("checkpoints must lie in [1, t_max]");
    if (k > 0 && t <= config.checkpoints[k - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  }

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(ni);
  Eigen::VectorXd abar = Eigen::VectorXd::Zero(ni);
  DualModel probe{dataset.xs, Eigen::VectorXd(), dataset.spec.alpha};

  SamplingScheme scheme(config.scheme);
  Rng rng(config.seed);
  RunResult result;
  result.trajectory.reserve(config.checkpoints.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t next_cp = 0;

  for (std::size_t u = 1; u <= config.t_max; ++u) {
    const auto i = static_cast<Eigen::Index>(scheme.next_index(n, rng));
    const double residual = dataset.ys[i] - gram.row(i).dot(a);
    a[i] += config.gamma * residual;
    abar += (a - abar) / static_cast<double>(u);
    if (observer) observer(u, a, abar);
    if (next_cp < config.checkpoints.size() &&
        config.checkpoints[next_cp] == u) {
      probe.coeffs = abar;
      const double excess = risk_oracle(probe);
      result.trajectory.push_back({u, excess});
      if (excess < best) {
        best = excess;
        result.t_star = u;
      }
      ++next_cp;
    }
  }
  result.final_coeffs = std::move(abar);
  result.raw_coeffs = std::move(a);
  return result;
}

Eigen::VectorXd average_check(const std::vector<Eigen::VectorXd>& iterates) {
  if (iterates.empty())
    throw std::invalid_argument("average_check requires at least one iterate");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(iterates.front().size());
  for (const auto& v : iterates) acc += v;
  return acc / static_cast<double>(iterates.size());
}

std::vector<std::size_t> geometric_checkpoints(std::size_t t_max,
                                               std::size_t n, double ratio) {
  if (t_max == 0) throw std::invalid_argument("t_max must be positive");
  if (!(ratio > 1.0)) throw std::invalid_argument("ratio must exceed 1");
  std::vector<std::size_t> cps;
  for (std::size_t t = 1; t < t_max;) {
    cps.push_back(t);
    const auto scaled = static_cast<std::size_t>(
        std::ceil(static_cast<double>(t) * ratio));
    t = std::max(t + 1, scaled);
  }
  cps.push_back(t_max);
  if (n >= 1 && n <= t_max) cps.push_back(n);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

}  // namespace multipass

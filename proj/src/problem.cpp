#include "multipass/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "multipass/rng.hpp"

namespace multipass {

namespace {

double draw_input(Rng& rng, bool singular_target) {
  const double eps = std::numeric_limits<double>::epsilon();
  double x = rng.uniform();
  while (singular_target && std::min(x, 1.0 - x) <= eps) x = rng.uniform();
  return x;
}

}  // namespace

ProblemSpec::ProblemSpec(double alpha_in, double r_in, double sigma_in)
    : alpha(alpha_in), r(r_in), sigma(sigma_in) {
  if (!(alpha > 1.0)) {
    std::ostringstream msg;
    msg << "alpha must exceed 1, got " << alpha;
    throw std::invalid_argument(msg.str());
  }
  if (!(r > 0.0)) {
    std::ostringstream msg;
    msg << "r must be positive, got " << r;
    throw std::invalid_argument(msg.str());
  }
  if (!(sigma >= 0.0)) {
    std::ostringstream msg;
    msg << "sigma must be nonnegative, got " << sigma;
    throw std::invalid_argument(msg.str());
  }
}

Dataset sample_dataset(const ProblemSpec& spec, std::size_t n,
                       std::uint64_t seed) {
  Dataset ds{spec, {}, Eigen::VectorXd(static_cast<Eigen::Index>(n)), seed};
  ds.xs.resize(n);
  Rng rng(seed);
  const bool singular_target = spec.target_order() <= 1.0;
  for (std::size_t i = 0; i < n; ++i)
    ds.xs[i] = draw_input(rng, singular_target);
  auto target = shared_evaluator(spec.target_order());
  for (std::size_t i = 0; i < n; ++i)
    ds.ys[static_cast<Eigen::Index>(i)] =
        (*target)(ds.xs[i]) + spec.sigma * rng.normal();
  return ds;
}

double target_eval(const ProblemSpec& spec, double x) {
  return (*shared_evaluator(spec.target_order()))(x);
}

RiskEvaluator::RiskEvaluator(const ProblemSpec& spec,
                             const std::vector<double>& anchors) {
  auto pair_ev = shared_evaluator(2.0 * spec.alpha);
  auto cross_ev = shared_evaluator(spec.alpha + spec.target_order());
  m2_ = gram_matrix(*pair_ev, anchors);
  v_.resize(static_cast<Eigen::Index>(anchors.size()));
  for (Eigen::Index i = 0; i < v_.size(); ++i)
    v_[i] = (*cross_ev)(anchors[static_cast<std::size_t>(i)]);
  c_ = 2.0 * zeta(2.0 * spec.r * spec.alpha + 1.0);
}

double RiskEvaluator::operator()(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != m2_.rows())
    throw std::invalid_argument(
        "coefficient count does not match anchor count");
  return coeffs.dot(m2_ * coeffs) - 2.0 * coeffs.dot(v_) + c_;
}

double excess_risk(const DualModel& model, const ProblemSpec& spec) {
  if (model.order != spec.alpha) {
    std::ostringstream msg;
    msg << "model order " << model.order << " does not match problem kernel "
        << spec.alpha;
    throw invalid_order_error(msg.str());
  }
  return RiskEvaluator(spec, model.anchors)(model.coeffs);
}

MonteCarloRisk excess_risk_mc(const DualModel& model, const ProblemSpec& spec,
                              std::size_t m, std::uint64_t seed) {
  if (m < 100) throw std::invalid_argument("excess_risk_mc requires m >= 100");
  if (static_cast<std::size_t>(model.coeffs.size()) != model.anchors.size())
    throw std::invalid_argument(
        "coefficient count does not match anchor count");
  auto model_ev = shared_evaluator(model.order);
  auto target_ev = shared_evaluator(spec.target_order());
  const bool singular_target = spec.target_order() <= 1.0;
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double x = draw_input(rng, singular_target);
    double fit = 0.0;
    for (std::size_t i = 0; i < model.anchors.size(); ++i)
      fit += model.coeffs[static_cast<Eigen::Index>(i)] *
             (*model_ev)(x - model.anchors[i]);
    const double d = fit - (*target_ev)(x);
    sum += d * d;
    sum_sq += d * d * d * d;
  }
  const double md = static_cast<double>(m);
  const double mean = sum / md;
  const double var = std::max(0.0, (sum_sq - md * mean * mean) / (md - 1.0));
  return {mean, std::sqrt(var / md)};
}

}  // namespace multipass

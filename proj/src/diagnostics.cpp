#include "multipass/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace multipass {

namespace {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

// Ordinary least squares of log(value) against log(index).
LogLogFit fit_loglog(const std::vector<std::size_t>& indices,
                     const std::vector<double>& values) {
  const auto n = static_cast<double>(indices.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(indices.size()), ys(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    xs[i] = std::log(static_cast<double>(indices[i]));
    ys[i] = std::log(values[i]);
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate index range in log-log fit");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace

double effective_dimension(const Eigen::VectorXd& eigs, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  double acc = 0.0;
  for (Eigen::Index m = 0; m < eigs.size(); ++m) {
    if (eigs[m] < 0.0) throw std::invalid_argument("negative eigenvalue");
    acc += eigs[m] / (eigs[m] + lambda);
  }
  return acc;
}

SpectrumFit fit_alpha(const Eigen::VectorXd& eigs, std::size_t m_lo,
                      std::size_t m_hi) {
  if (m_lo < 2) throw std::invalid_argument("window must start at index 2 or later");
  if (m_hi > static_cast<std::size_t>(eigs.size()))
    throw std::invalid_argument("window exceeds spectrum length");
  if (m_hi < m_lo + 7)
    throw std::invalid_argument("window must contain at least 8 points");
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  idx.reserve(m_hi - m_lo + 1);
  vals.reserve(m_hi - m_lo + 1);
  for (std::size_t m = m_lo; m <= m_hi; ++m) {
    const double v = eigs[static_cast<Eigen::Index>(m - 1)];
    if (!(v > 0.0))
      throw std::invalid_argument("eigenvalues in the fit window must be positive");
    idx.push_back(m);
    vals.push_back(v);
  }
  const LogLogFit fit = fit_loglog(idx, vals);
  SpectrumFit out;
  out.alpha_hat = -fit.slope;
  out.m_lo = m_lo;
  out.m_hi = m_hi;
  out.fit_quality = fit.r_squared;
  return out;
}

SpectrumFit fit_alpha(const Eigen::VectorXd& eigs) {
  const auto n = static_cast<std::size_t>(eigs.size());
  return fit_alpha(eigs, 3, n / 4);
}

SourceFit fit_r(const Eigen::VectorXd& eigs,
                const Eigen::VectorXd& coefficients, double alpha_hat) {
  if (eigs.size() != coefficients.size())
    throw std::invalid_argument("eigenvalues and coefficients must align");
  if (!(alpha_hat > 1.0)) throw std::invalid_argument("alpha_hat must exceed 1");
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  for (Eigen::Index m = 0; m < coefficients.size(); ++m) {
    const double c2 = coefficients[m] * coefficients[m];
    if (c2 > 0.0) {
      idx.push_back(static_cast<std::size_t>(m) + 1);
      vals.push_back(c2);
    }
  }
  if (idx.empty()) throw std::invalid_argument("all coefficients vanish");
  SourceFit out;
  if (idx.size() == 1) {
    // Mass on a single eigendirection decays faster than any power law.
    out.beta_hat = std::numeric_limits<double>::infinity();
    out.r_hat = 1.0;
    return out;
  }
  const LogLogFit fit = fit_loglog(idx, vals);
  out.beta_hat = -fit.slope;
  out.r_hat = std::clamp((alpha_hat + out.beta_hat - 1.0) / (2.0 * alpha_hat),
                         0.0, 1.0);
  return out;
}

SpectrumProjection ingest_features(const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& labels) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("empty feature matrix");
  if (labels.size() != n)
    throw std::invalid_argument("label count must match sample count");

  const Eigen::MatrixXd second_moment =
      (features.transpose() * features) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_moment);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");

  // Eigen sorts ascending; flip to descending.
  Eigen::VectorXd eigs = es.eigenvalues().reverse();
  Eigen::MatrixXd basis = es.eigenvectors().rowwise().reverse();

  const double cutoff = 1e-12 * std::max(eigs[0], 0.0);
  const Eigen::VectorXd projected_rhs =
      basis.transpose() * (features.transpose() * labels) /
      static_cast<double>(n);
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(d);
  for (Eigen::Index m = 0; m < d; ++m) {
    if (eigs[m] > cutoff) coefficients[m] = projected_rhs[m] / eigs[m];
    if (eigs[m] < 0.0) eigs[m] = 0.0;
  }

  SpectrumProjection out;
  out.eigs = std::move(eigs);
  out.coefficients = coefficients;
  out.solution = basis * coefficients;
  return out;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, delimiter)) {
      std::size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell at line " +
                                 std::to_string(lineno));
      }
      while (consumed < cell.size() &&
             std::isspace(static_cast<unsigned char>(cell[consumed])))
        ++consumed;
      if (consumed != cell.size())
        throw std::runtime_error("non-numeric cell at line " +
                                 std::to_string(lineno));
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged row at line " + std::to_string(lineno));
    if (row.empty())
      throw std::runtime_error("empty row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return out;
}

}  // namespace multipass

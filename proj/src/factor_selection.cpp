#include "ipc/factor_selection.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ipc/kernels.hpp"
#include "ipc/numerics.hpp"

namespace ipc {
namespace {

// Eigenvalues and mock values at or below this fraction of the total
// residual energy are rounding noise and treated as exact zeros.
constexpr double kZeroFloor = 1e-13;

}  // namespace

RatioDecision eigen_ratio_select(std::span<const double> eigenvalues, double mock, double tau) {
  if (eigenvalues.size() < 2) {
    throw Error(ErrorCode::InvalidEigenvalues, "need lambda_1..lambda_{d_max+1} with d_max >= 1");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::DegenerateThreshold, "threshold must lie in (0, 1)");
  }
  if (!(mock >= 0.0) || !std::isfinite(mock)) {
    throw Error(ErrorCode::InvalidEigenvalues, "mock eigenvalue must be finite and >= 0");
  }
  std::vector<double> lam(eigenvalues.begin(), eigenvalues.end());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    if (!std::isfinite(lam[k]) || lam[k] < -1e-10) {
      throw Error(ErrorCode::InvalidEigenvalues, "eigenvalues must be finite and non-negative");
    }
    if (k > 0 && lam[k] > lam[k - 1]) {
      throw Error(ErrorCode::InvalidEigenvalues, "eigenvalues must be sorted in descending order");
    }
    lam[k] = std::max(lam[k], 0.0);
  }
  const std::size_t d_max = lam.size() - 1;
  // value(d): lambda_0 = mock, lambda_d = lam[d-1].
  auto value = [&](std::size_t d) { return d == 0 ? mock : lam[d - 1]; };

  RatioDecision out;
  out.threshold = tau;
  out.criterion_values.assign(d_max + 1, 1.0);
  out.passed_indicator.assign(d_max + 1, false);

  if (mock == 0.0 && lam[0] == 0.0) {
    // Perfect fit: nothing left to extract.
    out.criterion_values[0] = 0.0;
    out.passed_indicator[0] = true;
    out.chosen_d = 0;
    return out;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d <= d_max; ++d) {
    const double num = value(d);
    bool passed = false;
    if (d == 0) {
      passed = true;
    } else if (mock == 0.0) {
      passed = num > 0.0;
    } else {
      passed = num / mock >= tau;
    }
    out.passed_indicator[d] = passed;
    if (passed) {
      const double next = value(d + 1);
      out.criterion_values[d] = num > 0.0 ? next / num : inf;
    }
  }
  std::size_t best = 0;
  for (std::size_t d = 1; d <= d_max; ++d) {
    if (out.criterion_values[d] < out.criterion_values[best]) best = d;
  }
  out.chosen_d = static_cast<int>(best);
  return out;
}

double mock_eigenvalue(const PanelDataset& data, const Eigen::VectorXd& beta0,
                       const Eigen::MatrixXd& prior_factors) {
  const Eigen::MatrixXd q = orthonormal_basis(prior_factors);
  const Eigen::VectorXd norms = kernels::omp::projected_sq_norms(q, data.residual(beta0));
  return std::max(0.0, norms.sum() / static_cast<double>(data.n_units()));
}

double threshold_tau(double anchor, Eigen::Index n_units) {
  const double m = std::max(anchor, static_cast<double>(n_units));
  if (!(m > std::numbers::e)) {
    throw Error(ErrorCode::DegenerateThreshold,
                "max(mock, N) must exceed e for the threshold to lie below one");
  }
  return 1.0 / std::log(m);
}

Eigen::MatrixXd combine_factors(const std::vector<FactorGroup>& groups, Eigen::Index t) {
  Eigen::Index total = 0;
  for (const auto& g : groups) total += g.dim;
  Eigen::MatrixXd out(t, total);
  Eigen::Index c = 0;
  for (const auto& g : groups) {
    out.middleCols(c, g.dim) = g.factors;
    c += g.dim;
  }
  return out;
}

Eigen::MatrixXd combine_loadings(const std::vector<FactorGroup>& groups, Eigen::Index n) {
  Eigen::Index total = 0;
  for (const auto& g : groups) total += g.dim;
  Eigen::MatrixXd out(n, total);
  Eigen::Index c = 0;
  for (const auto& g : groups) {
    out.middleCols(c, g.dim) = g.loadings;
    c += g.dim;
  }
  return out;
}

FactorGroup extract_group(const PanelDataset& data, const InitResult& init,
                          const std::vector<FactorGroup>& prior, const IpcConfig& config) {
  const Eigen::Index t = data.n_periods();
  const Eigen::Index n = data.n_units();
  Eigen::Index prior_dims = 0;
  for (const auto& g : prior) prior_dims += g.dim;
  if (prior_dims + config.d_max >= t) {
    throw Error(ErrorCode::GroupBudgetExceeded,
                "accumulated factor dimensions plus d_max reach T");
  }

  const Eigen::MatrixXd base = data.residual(init.beta0);
  const double energy = base.squaredNorm() / static_cast<double>(n);
  const double floor = kZeroFloor * energy;

  // u_i - F_{-g} gamma_{-g,i}, deflating group by group.
  Eigen::MatrixXd u = base;
  for (const auto& g : prior) u.noalias() -= g.factors * g.loadings.transpose();

  const Eigen::MatrixXd prior_factors = prior.empty() ? init.f0 : combine_factors(prior, t);
  double mock = mock_eigenvalue(data, init.beta0, prior_factors);
  if (mock <= floor) mock = 0.0;

  const Eigen::MatrixXd sigma = kernels::omp::second_moment(u);
  const SymEigen eig = sym_eigh_top(sigma, config.d_max + 1);
  Eigen::VectorXd lam = eig.values;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) <= floor) lam(k) = 0.0;
  }

  const double anchor = (config.threshold_rule == ThresholdRule::GlobalMock && !prior.empty())
                            ? prior.front().mock_eigenvalue
                            : mock;
  const double tau = threshold_tau(anchor, n);
  const RatioDecision decision =
      eigen_ratio_select(std::span<const double>(lam.data(), lam.size()), mock, tau);

  FactorGroup group;
  group.group_index = static_cast<int>(prior.size()) + 1;
  group.dim = decision.chosen_d;
  group.eigenvalues = lam;
  group.mock_eigenvalue = mock;
  group.threshold = tau;
  group.criterion = decision.criterion_values;
  const double tt = static_cast<double>(t);
  group.factors = std::pow(tt, 0.5 * config.delta) * eig.vectors.leftCols(group.dim);
  group.loadings = std::pow(tt, -config.delta) * (u.transpose() * group.factors);
  return group;
}

std::vector<FactorGroup> iterate_groups(const PanelDataset& data, const InitResult& init,
                                        const IpcConfig& config) {
  std::vector<FactorGroup> groups;
  Eigen::Index dims = 0;
  for (int g = 1;; ++g) {
    if (dims + config.d_max >= data.n_periods()) {
      throw GroupBudgetExceeded(groups, "accumulated factor dimensions plus d_max reach T after " +
                                            std::to_string(groups.size()) + " groups");
    }
    FactorGroup group = extract_group(data, init, groups, config);
    if (group.dim == 0) break;
    // A group beyond d_max may only confirm that nothing is left.
    if (g > config.d_max) {
      throw GroupBudgetExceeded(groups, "group " + std::to_string(g) +
                                            " still selected factors; more groups than d_max");
    }
    dims += group.dim;
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace ipc

#include "ipc/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ipc {

PanelDataset::PanelDataset(Eigen::MatrixXd y, Eigen::MatrixXd x, Eigen::Index n_regressors,
                           std::vector<std::string> unit_labels,
                           std::vector<std::string> time_labels)
    : y_(std::move(y)),
      x_(std::move(x)),
      n_regressors_(n_regressors),
      unit_labels_(std::move(unit_labels)),
      time_labels_(std::move(time_labels)) {
  if (n_regressors_ < 1) {
    throw Error(ErrorCode::DimensionMismatch, "at least one regressor is required");
  }
  if (x_.rows() != y_.rows() || x_.cols() != y_.cols() * n_regressors_) {
    throw Error(ErrorCode::DimensionMismatch,
                "x must be T x (N*d_x) with T, N matching y");
  }
  if (unit_labels_.empty()) {
    for (Eigen::Index i = 0; i < n_units(); ++i) unit_labels_.push_back(std::to_string(i + 1));
  }
  if (time_labels_.empty()) {
    for (Eigen::Index t = 0; t < n_periods(); ++t) time_labels_.push_back(std::to_string(t + 1));
  }
  if (static_cast<Eigen::Index>(unit_labels_.size()) != n_units() ||
      static_cast<Eigen::Index>(time_labels_.size()) != n_periods()) {
    throw Error(ErrorCode::DimensionMismatch, "label counts do not match panel dimensions");
  }
}

Eigen::MatrixXd PanelDataset::regressor(Eigen::Index j) const {
  Eigen::MatrixXd out(n_periods(), n_units());
  for (Eigen::Index i = 0; i < n_units(); ++i) out.col(i) = x_.col(i * n_regressors_ + j);
  return out;
}

Eigen::MatrixXd PanelDataset::residual(const Eigen::VectorXd& beta) const {
  if (beta.size() != n_regressors_) {
    throw Error(ErrorCode::DimensionMismatch, "beta length must equal d_x");
  }
  Eigen::MatrixXd u = y_;
  for (Eigen::Index i = 0; i < n_units(); ++i) u.col(i).noalias() -= x_unit(i) * beta;
  return u;
}

PanelDataset PanelDataset::select_units(const std::vector<Eigen::Index>& units) const {
  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::MatrixXd y(n_periods(), n);
  Eigen::MatrixXd x(n_periods(), n * n_regressors_);
  std::vector<std::string> labels;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = units[k];
    y.col(k) = y_.col(i);
    x.middleCols(k * n_regressors_, n_regressors_) = x_unit(i);
    labels.push_back(unit_labels_[i]);
  }
  return PanelDataset(std::move(y), std::move(x), n_regressors_, std::move(labels), time_labels_);
}

PanelDataset PanelDataset::select_periods(const std::vector<Eigen::Index>& periods) const {
  const auto t_new = static_cast<Eigen::Index>(periods.size());
  Eigen::MatrixXd y(t_new, n_units());
  Eigen::MatrixXd x(t_new, x_.cols());
  std::vector<std::string> labels;
  for (Eigen::Index k = 0; k < t_new; ++k) {
    y.row(k) = y_.row(periods[k]);
    x.row(k) = x_.row(periods[k]);
    labels.push_back(time_labels_[periods[k]]);
  }
  return PanelDataset(std::move(y), std::move(x), n_regressors_, unit_labels_, std::move(labels));
}

const char* to_string(ThresholdRule rule) {
  return rule == ThresholdRule::GlobalMock ? "global" : "pergroup";
}

const char* to_string(InitRule rule) {
  return rule == InitRule::ZeroFactorOLS ? "zero_factor_ols" : "two_way_fe";
}

void validate_dataset(const PanelDataset& dataset) {
  const Eigen::Index n = dataset.n_units();
  const Eigen::Index t = dataset.n_periods();
  const Eigen::Index dx = dataset.n_regressors();
  if (n < 2 || t < 2 || dx < 1) {
    throw Error(ErrorCode::DimensionMismatch, "panel needs N >= 2, T >= 2 and d_x >= 1");
  }
  if (!dataset.y().allFinite() || !dataset.x().allFinite()) {
    throw Error(ErrorCode::NonFiniteData, "panel contains non-finite values");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dx; ++j) {
      const auto col = dataset.x().col(i * dx + j);
      if (col.maxCoeff() == col.minCoeff()) {
        throw Error(ErrorCode::TimeInvariantRegressor,
                    "regressor j=" + std::to_string(j + 1) + " is constant over time for unit i=" +
                        std::to_string(i + 1) + " (" + dataset.unit_labels()[i] + ")");
      }
    }
  }
}

void validate(const PanelDataset& dataset, const IpcConfig& config) {
  validate_dataset(dataset);
  if (config.d_max < 1) throw Error(ErrorCode::InvalidConfig, "d_max must be >= 1");
  if (!(config.delta >= 0.0) || !std::isfinite(config.delta)) {
    throw Error(ErrorCode::InvalidConfig, "delta must be finite and >= 0");
  }
  if (!(config.als_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "als_tol must be > 0");
  if (config.als_max_iter < 1) throw Error(ErrorCode::InvalidConfig, "als_max_iter must be >= 1");
  if (config.n_starts < 1) throw Error(ErrorCode::InvalidConfig, "n_starts must be >= 1");
  const Eigen::Index bound = std::min(dataset.n_units(), dataset.n_periods());
  if (config.d_max >= bound) {
    throw Error(ErrorCode::DmaxTooLarge, "d_max=" + std::to_string(config.d_max) +
                                             " must be below min(N,T)=" + std::to_string(bound));
  }
}

}  // namespace ipc

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ipc/error.hpp"

namespace ipc {

/// Balanced panel y_{i,t}, x_{i,t} stored unit-major.
///
/// `y()` is T x N with column i holding y_i. `x()` is T x (N * d_x) and the
/// d_x consecutive columns starting at i * d_x hold X_i, so all T periods of
/// a unit are contiguous.
class PanelDataset {
 public:
  PanelDataset() = default;
  /// Throws DimensionMismatch when shapes or label counts disagree.
  PanelDataset(Eigen::MatrixXd y, Eigen::MatrixXd x, Eigen::Index n_regressors,
               std::vector<std::string> unit_labels = {},
               std::vector<std::string> time_labels = {});

  Eigen::Index n_units() const { return y_.cols(); }
  Eigen::Index n_periods() const { return y_.rows(); }
  Eigen::Index n_regressors() const { return n_regressors_; }

  const Eigen::MatrixXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }

  auto y_unit(Eigen::Index i) const { return y_.col(i); }
  auto x_unit(Eigen::Index i) const { return x_.middleCols(i * n_regressors_, n_regressors_); }
  double x_at(Eigen::Index j, Eigen::Index i, Eigen::Index t) const {
    return x_(t, i * n_regressors_ + j);
  }

  /// T x N matrix of regressor j across units.
  Eigen::MatrixXd regressor(Eigen::Index j) const;

  /// Y - sum_j beta_j X_j as a T x N matrix.
  Eigen::MatrixXd residual(const Eigen::VectorXd& beta) const;

  const std::vector<std::string>& unit_labels() const { return unit_labels_; }
  const std::vector<std::string>& time_labels() const { return time_labels_; }

  /// Sub-panel keeping the given units (in the given order).
  PanelDataset select_units(const std::vector<Eigen::Index>& units) const;
  /// Sub-panel keeping the given periods (in the given order).
  PanelDataset select_periods(const std::vector<Eigen::Index>& periods) const;

 private:
  Eigen::MatrixXd y_;
  Eigen::MatrixXd x_;
  Eigen::Index n_regressors_ = 0;
  std::vector<std::string> unit_labels_;
  std::vector<std::string> time_labels_;
};

enum class ThresholdRule { GlobalMock, PerGroupMock };
enum class InitRule { ZeroFactorOLS, TwoWayFE };

struct IpcConfig {
  double delta = 1.0;
  int d_max = 10;
  double als_tol = 1e-8;
  int als_max_iter = 1000;
  ThresholdRule threshold_rule = ThresholdRule::GlobalMock;
  InitRule init_rule = InitRule::ZeroFactorOLS;
  /// Number of ALS starts; starts after the first use seeded random factors.
  int n_starts = 1;
  std::uint64_t seed = 0;
};

const char* to_string(ThresholdRule rule);
const char* to_string(InitRule rule);

/// One estimated factor group.
struct FactorGroup {
  int group_index = 0;  // 1-based g
  int dim = 0;          // selected dimension
  /// lambda_{g,1} >= ... >= lambda_{g,d_max+1}; the last entry feeds the
  /// ratio at d = d_max.
  Eigen::VectorXd eigenvalues;
  double mock_eigenvalue = 0.0;
  double threshold = 0.0;
  std::vector<double> criterion;
  Eigen::MatrixXd factors;   // T x dim
  Eigen::MatrixXd loadings;  // N x dim
};

struct IpcFit {
  Eigen::VectorXd beta0;
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta;
  std::vector<FactorGroup> groups;
  int n_groups = 0;
  int total_factors = 0;
  Eigen::MatrixXd factors_combined;   // T x d_f
  Eigen::MatrixXd loadings_combined;  // N x d_f
  Eigen::MatrixXd f0;                 // Step 1 factors, T x d_max
  /// T x N; column i is y_i - X_i beta - F gamma_i.
  Eigen::MatrixXd residuals;
  Eigen::VectorXd sigma2_by_unit;
  /// sum_i Z_i'Z_i and sum_i X_i'M_F X_i as used for beta.
  Eigen::MatrixXd z_gram;
  Eigen::MatrixXd projected_gram;
  std::vector<double> ssr_path;
  int als_iterations = 0;
  bool converged = false;
  double delta = 1.0;
};

/// Simulation ground truth. `nu_exponents` is descriptive only.
struct TruthSpec {
  Eigen::VectorXd beta_true;
  Eigen::MatrixXd factors_true;   // T x d_f
  Eigen::MatrixXd loadings_true;  // N x d_f
  std::vector<int> group_dims;
  std::vector<double> nu_exponents;
};

/// Checks the dataset and configuration invariants. Throws DimensionMismatch,
/// NonFiniteData, TimeInvariantRegressor (1-based unit/regressor in the
/// message), DmaxTooLarge or InvalidConfig.
void validate(const PanelDataset& dataset, const IpcConfig& config);

/// Dataset-only part of `validate`.
void validate_dataset(const PanelDataset& dataset);

}  // namespace ipc

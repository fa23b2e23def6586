#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

#include "ipc/model.hpp"

namespace ipc {

/// H0: R beta = r with R of full row rank r0 <= d_x.
struct WaldSpec {
  Eigen::MatrixXd r_matrix;
  Eigen::VectorXd r_vector;

  /// R = I, r = value.
  static WaldSpec joint(const Eigen::VectorXd& value);
  /// R = e_j', r = value.
  static WaldSpec coefficient(Eigen::Index d_x, Eigen::Index j, double value = 0.0);
};

struct InferenceResult {
  Eigen::VectorXd beta;        // the estimate being tested
  Eigen::MatrixXd covariance;  // B^{-1} (sum sigma2_i Z_i'Z_i) B^{-1}, B = sum Z_i'Z_i
  Eigen::VectorXd std_errors;
  double wald_stat = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Sandwich Wald statistic for an arbitrary (beta, F, Z) triple. `z` uses the
/// unit-major T x (N * d_x) layout. Throws RankDeficientR or
/// SingularCovariance.
InferenceResult sandwich_wald(const PanelDataset& data, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& factors, const Eigen::MatrixXd& z,
                              const WaldSpec& spec);

/// sigma^2_i at the final estimate.
Eigen::VectorXd unit_variances(const PanelDataset& data, const IpcFit& fit);

/// Wald test at (beta_hat, F_hat) with the Z_i weighting.
InferenceResult wald_test(const PanelDataset& data, const IpcFit& fit, const WaldSpec& spec);

enum class WaldVariant {
  AtBeta0,   // (beta0, F0) with Z built from F0 and its loadings
  AtBeta1,   // (beta1, F_hat) with the same Z as wald_test
  AtOracle,  // beta(F0_true) with M_F X_i in place of Z_i
};

/// Comparison statistics. AtOracle requires `true_factors`.
InferenceResult wald_variant(const PanelDataset& data, const IpcFit& fit, const WaldSpec& spec,
                             WaldVariant variant,
                             const Eigen::MatrixXd& true_factors = Eigen::MatrixXd());

struct JackknifeResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd beta_bc;
  /// beta_{1,N}, beta_{2,N}, beta_{1,T}, beta_{2,T}
  std::array<Eigen::VectorXd, 4> sub_estimates;
  /// Selected group dimensions per sub-panel; may differ from the full fit.
  std::array<std::vector<int>, 4> sub_group_dims;
};

inline constexpr std::array<const char*, 4> kJackknifeSubPanels = {
    "units_first_half", "units_second_half", "odd_periods", "even_periods"};

/// 3 beta - (1/2) sum of the four sub-panel estimates.
Eigen::VectorXd jackknife_combine(const Eigen::VectorXd& beta,
                                  const std::array<Eigen::VectorXd, 4>& sub_estimates);

/// Unit index sets {1..floor(N/2)}, {floor(N/2)+1..N} (0-based here).
std::array<std::vector<Eigen::Index>, 2> half_panel_units(Eigen::Index n);
/// Periods 1,3,5,... and 2,4,6,... in 1-based numbering (0-based here).
std::array<std::vector<Eigen::Index>, 2> odd_even_periods(Eigen::Index t);

/// Hybrid half-panel jackknife: reruns the full pipeline on each sub-panel.
/// Errors from a sub-fit are rethrown with the sub-panel name prepended.
JackknifeResult jackknife_bias_correct(const PanelDataset& data, const IpcConfig& config);

/// ln(sum_i |gamma_{g,i}|^2 / sum_i |gamma_{g+1,i}|^2) / ln T for 1-based g.
double strength_gap_diagnostic(const std::vector<FactorGroup>& groups, Eigen::Index t, int g);

}  // namespace ipc

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ipc/model.hpp"

namespace ipc {

/// Joint minimizer of SSR(beta, F) over beta and T^{-delta} F'F = I_{d_max}.
struct InitResult {
  Eigen::VectorXd beta0;
  Eigen::MatrixXd f0;  // T x d_max
  /// SSR after each full ALS sweep, starting with the sweep from the initial beta.
  std::vector<double> ssr_path;
  int iterations = 0;
  bool converged = false;
};

/// beta(F) = (sum_i X_i'M_F X_i)^{-1} sum_i X_i'M_F y_i. F may have zero
/// columns. Throws SingularDesign or RankDeficient.
Eigen::VectorXd beta_given_f(const PanelDataset& data, const Eigen::MatrixXd& f);

/// T^{delta/2} times the k leading eigenvectors of N^{-1} sum_i u_i u_i' with
/// u_i = y_i - X_i beta.
Eigen::MatrixXd f_given_beta(const PanelDataset& data, const Eigen::VectorXd& beta,
                             Eigen::Index k, double delta);

/// SSR(beta, F) = sum_i (y_i - X_i beta)' M_F (y_i - X_i beta).
double concentrated_ssr(const PanelDataset& data, const Eigen::VectorXd& beta,
                        const Eigen::MatrixXd& f);

/// Two-way within (unit and period demeaned) pooled OLS.
Eigen::VectorXd two_way_fe_beta(const PanelDataset& data);

/// Alternates beta_given_f and f_given_beta from the configured start until
/// the relative SSR change falls below `als_tol`. A run that exhausts
/// `als_max_iter` is returned with `converged == false`; the caller decides.
InitResult fit_initial(const PanelDataset& data, const IpcConfig& config);

/// ALS from an explicit starting beta (no validation).
InitResult run_als(const PanelDataset& data, const IpcConfig& config,
                   const Eigen::VectorXd& beta_start);

/// Number of ALS sweeps, process-wide, whose SSR rose by more than
/// 1e-10 * SSR of the first sweep. Test harnesses assert this stays zero.
std::uint64_t als_monotonicity_violations();
/// Number of ALS runs executed process-wide.
std::uint64_t als_runs();

}  // namespace ipc

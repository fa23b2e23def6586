#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ipc/init_estimator.hpp"
#include "ipc/model.hpp"

namespace ipc {

/// a_ij = gamma_i' (Gamma'Gamma)^{-1} gamma_j, an N x N projector. Zero
/// matrix when `loadings` has no columns. Throws SingularLoadings.
Eigen::MatrixXd loading_weights(const Eigen::MatrixXd& loadings);

/// Z_i = M_F X_i - sum_j M_F X_j a_ij, returned in the dataset's unit-major
/// layout: T x (N * d_x), block i holding Z_i.
Eigen::MatrixXd z_matrices(const PanelDataset& data, const Eigen::MatrixXd& factors,
                           const Eigen::MatrixXd& a);

/// Block i of a unit-major T x (N * width) matrix.
inline auto unit_block(const Eigen::MatrixXd& m, Eigen::Index i, Eigen::Index width) {
  return m.middleCols(i * width, width);
}

/// sigma^2_i = T^{-1} (y_i - X_i beta)' M_F (y_i - X_i beta).
Eigen::VectorXd unit_variances(const PanelDataset& data, const Eigen::VectorXd& beta,
                               const Eigen::MatrixXd& factors);

/// beta = beta0 + (sum Z_i'Z_i)^{-1} sum X_i'M_F X_i (beta1 - beta0), with
/// beta1 = beta(F) on the combined group factors. Throws SingularZGram.
IpcFit fit_final(const PanelDataset& data, const InitResult& init,
                 const std::vector<FactorGroup>& groups, double delta);

}  // namespace ipc

#include "ipc/final_estimator.hpp"

#include "ipc/factor_selection.hpp"
#include "ipc/kernels.hpp"
#include "ipc/numerics.hpp"

namespace ipc {

Eigen::MatrixXd loading_weights(const Eigen::MatrixXd& loadings) {
  const Eigen::Index n = loadings.rows();
  if (loadings.cols() == 0) return Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd gram = loadings.transpose() * loadings;
  const Eigen::MatrixXd solved =
      spd_solve(gram, loadings.transpose(), ErrorCode::SingularLoadings, "Gamma'Gamma");
  Eigen::MatrixXd a = loadings * solved;
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd z_matrices(const PanelDataset& data, const Eigen::MatrixXd& factors,
                           const Eigen::MatrixXd& a) {
  const Eigen::Index n = data.n_units();
  if (a.rows() != n || a.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "a must be N x N");
  }
  if (factors.rows() != data.n_periods()) {
    throw Error(ErrorCode::DimensionMismatch, "factors must have T rows");
  }
  const Eigen::MatrixXd q = orthonormal_basis(factors);
  const Eigen::MatrixXd mx = kernels::annihilate(q, data.x());
  Eigen::MatrixXd z = mx;
  z -= kernels::omp::combine_units(mx, data.n_regressors(), a);
  return z;
}

Eigen::VectorXd unit_variances(const PanelDataset& data, const Eigen::VectorXd& beta,
                               const Eigen::MatrixXd& factors) {
  const Eigen::MatrixXd q = orthonormal_basis(factors);
  Eigen::VectorXd s = kernels::omp::projected_sq_norms(q, data.residual(beta));
  return (s / static_cast<double>(data.n_periods())).cwiseMax(0.0);
}

IpcFit fit_final(const PanelDataset& data, const InitResult& init,
                 const std::vector<FactorGroup>& groups, double delta) {
  const Eigen::Index t = data.n_periods();
  const Eigen::Index n = data.n_units();
  const Eigen::Index dx = data.n_regressors();

  IpcFit fit;
  fit.delta = delta;
  fit.beta0 = init.beta0;
  fit.f0 = init.f0;
  fit.groups = groups;
  fit.n_groups = static_cast<int>(groups.size());
  fit.factors_combined = combine_factors(groups, t);
  fit.loadings_combined = combine_loadings(groups, n);
  fit.total_factors = static_cast<int>(fit.factors_combined.cols());
  fit.ssr_path = init.ssr_path;
  fit.als_iterations = init.iterations;
  fit.converged = init.converged;

  const Eigen::MatrixXd q = orthonormal_basis(fit.factors_combined);
  const auto moments = kernels::omp::projected_moments(data, q, data.y());
  fit.beta1 = spd_solve(moments.gram, moments.cross, ErrorCode::SingularDesign,
                        "sum_i X_i'M_F X_i");
  fit.projected_gram = moments.gram;

  const Eigen::MatrixXd a = loading_weights(fit.loadings_combined);
  const Eigen::MatrixXd z = z_matrices(data, fit.factors_combined, a);
  fit.z_gram = kernels::omp::unit_gram(z, dx);
  const Eigen::VectorXd step = spd_solve(fit.z_gram, fit.projected_gram * (fit.beta1 - fit.beta0),
                                         ErrorCode::SingularZGram, "sum_i Z_i'Z_i");
  fit.beta = fit.beta0 + step;

  fit.residuals = data.residual(fit.beta);
  if (fit.total_factors > 0) {
    fit.residuals.noalias() -= fit.factors_combined * fit.loadings_combined.transpose();
  }
  fit.sigma2_by_unit = unit_variances(data, fit.beta, fit.factors_combined);
  return fit;
}

}  // namespace ipc

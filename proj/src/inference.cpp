#include "ipc/inference.hpp"

#include <cmath>
#include <string>

#include "ipc/final_estimator.hpp"
#include "ipc/init_estimator.hpp"
#include "ipc/kernels.hpp"
#include "ipc/numerics.hpp"
#include "ipc/pipeline.hpp"

namespace ipc {

WaldSpec WaldSpec::joint(const Eigen::VectorXd& value) {
  return {Eigen::MatrixXd::Identity(value.size(), value.size()), value};
}

WaldSpec WaldSpec::coefficient(Eigen::Index d_x, Eigen::Index j, double value) {
  WaldSpec spec{Eigen::MatrixXd::Zero(1, d_x), Eigen::VectorXd::Constant(1, value)};
  spec.r_matrix(0, j) = 1.0;
  return spec;
}

InferenceResult sandwich_wald(const PanelDataset& data, const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& factors, const Eigen::MatrixXd& z,
                              const WaldSpec& spec) {
  const Eigen::Index dx = data.n_regressors();
  const Eigen::Index r0 = spec.r_matrix.rows();
  if (spec.r_matrix.cols() != dx || spec.r_vector.size() != r0 || r0 < 1 || r0 > dx) {
    throw Error(ErrorCode::RankDeficientR, "R must be r0 x d_x with 1 <= r0 <= d_x and r of length r0");
  }
  if (gram_condition_ratio(spec.r_matrix * spec.r_matrix.transpose()) <= 1e-12) {
    throw Error(ErrorCode::RankDeficientR, "R does not have full row rank");
  }
  const Eigen::VectorXd sigma2 = unit_variances(data, beta, factors);
  const Eigen::MatrixXd bread = kernels::omp::unit_gram(z, dx);
  const Eigen::MatrixXd meat = kernels::omp::unit_gram(z, dx, sigma2);
  const Eigen::MatrixXd bread_inv =
      spd_solve(bread, Eigen::MatrixXd::Identity(dx, dx), ErrorCode::SingularCovariance,
                "sum_i Z_i'Z_i");

  InferenceResult out;
  out.beta = beta;
  out.covariance = bread_inv * meat * bread_inv;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd diff = spec.r_matrix * beta - spec.r_vector;
  const Eigen::MatrixXd middle = spec.r_matrix * out.covariance * spec.r_matrix.transpose();
  const Eigen::VectorXd solved =
      spd_solve(middle, diff, ErrorCode::SingularCovariance, "R V R'");
  out.wald_stat = std::max(0.0, diff.dot(solved));
  out.dof = static_cast<int>(r0);
  out.p_value = chi2_sf(out.wald_stat, out.dof);
  return out;
}

Eigen::VectorXd unit_variances(const PanelDataset& data, const IpcFit& fit) {
  return unit_variances(data, fit.beta, fit.factors_combined);
}

InferenceResult wald_test(const PanelDataset& data, const IpcFit& fit, const WaldSpec& spec) {
  const Eigen::MatrixXd a = loading_weights(fit.loadings_combined);
  const Eigen::MatrixXd z = z_matrices(data, fit.factors_combined, a);
  return sandwich_wald(data, fit.beta, fit.factors_combined, z, spec);
}

InferenceResult wald_variant(const PanelDataset& data, const IpcFit& fit, const WaldSpec& spec,
                             WaldVariant variant, const Eigen::MatrixXd& true_factors) {
  switch (variant) {
    case WaldVariant::AtBeta0: {
      const double scale = std::pow(static_cast<double>(data.n_periods()), -fit.delta);
      const Eigen::MatrixXd loadings0 = scale * (data.residual(fit.beta0).transpose() * fit.f0);
      const Eigen::MatrixXd z = z_matrices(data, fit.f0, loading_weights(loadings0));
      return sandwich_wald(data, fit.beta0, fit.f0, z, spec);
    }
    case WaldVariant::AtBeta1: {
      const Eigen::MatrixXd z =
          z_matrices(data, fit.factors_combined, loading_weights(fit.loadings_combined));
      return sandwich_wald(data, fit.beta1, fit.factors_combined, z, spec);
    }
    case WaldVariant::AtOracle: {
      if (true_factors.rows() != data.n_periods()) {
        throw Error(ErrorCode::DimensionMismatch, "oracle variant needs the true T x d_f factors");
      }
      const Eigen::VectorXd beta_oracle = beta_given_f(data, true_factors);
      const Eigen::MatrixXd z = kernels::annihilate(orthonormal_basis(true_factors), data.x());
      return sandwich_wald(data, beta_oracle, true_factors, z, spec);
    }
  }
  throw Error(ErrorCode::InvalidDomain, "unknown Wald variant");
}

Eigen::VectorXd jackknife_combine(const Eigen::VectorXd& beta,
                                  const std::array<Eigen::VectorXd, 4>& sub) {
  // Pairwise sums keep the fixed point exact: equal inputs return beta.
  const Eigen::VectorXd half_sum = 0.5 * ((sub[0] + sub[1]) + (sub[2] + sub[3]));
  return beta + (2.0 * beta - half_sum);
}

std::array<std::vector<Eigen::Index>, 2> half_panel_units(Eigen::Index n) {
  std::array<std::vector<Eigen::Index>, 2> out;
  for (Eigen::Index i = 0; i < n; ++i) out[i < n / 2 ? 0 : 1].push_back(i);
  return out;
}

std::array<std::vector<Eigen::Index>, 2> odd_even_periods(Eigen::Index t) {
  std::array<std::vector<Eigen::Index>, 2> out;
  // 0-based index 0 is period 1 (odd).
  for (Eigen::Index s = 0; s < t; ++s) out[s % 2].push_back(s);
  return out;
}

JackknifeResult jackknife_bias_correct(const PanelDataset& data, const IpcConfig& config) {
  if (data.n_units() < 4 || data.n_periods() < 4) {
    throw Error(ErrorCode::DimensionMismatch, "jackknife needs N >= 4 and T >= 4");
  }
  const auto units = half_panel_units(data.n_units());
  const auto periods = odd_even_periods(data.n_periods());
  const std::array<PanelDataset, 4> panels = {
      data.select_units(units[0]), data.select_units(units[1]),
      data.select_periods(periods[0]), data.select_periods(periods[1])};

  JackknifeResult out;
  out.beta = fit_ipc(data, config).beta;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    try {
      const IpcFit sub = fit_ipc(panels[k], config);
      out.sub_estimates[k] = sub.beta;
      for (const auto& g : sub.groups) out.sub_group_dims[k].push_back(g.dim);
    } catch (const Error& e) {
      throw Error(e.code(), std::string("jackknife sub-panel ") + kJackknifeSubPanels[k] +
                                ": " + e.what());
    }
  }
  out.beta_bc = jackknife_combine(out.beta, out.sub_estimates);
  return out;
}

double strength_gap_diagnostic(const std::vector<FactorGroup>& groups, Eigen::Index t, int g) {
  if (g < 1 || static_cast<std::size_t>(g) >= groups.size()) {
    throw Error(ErrorCode::EmptyGroup, "groups g and g+1 must both exist");
  }
  if (t < 3) throw Error(ErrorCode::InvalidDomain, "T must be at least 3");
  const auto& upper = groups[g - 1];
  const auto& lower = groups[g];
  if (upper.dim == 0 || lower.dim == 0) {
    throw Error(ErrorCode::EmptyGroup, "groups g and g+1 must have dimension >= 1");
  }
  const double num = upper.loadings.squaredNorm();
  const double den = lower.loadings.squaredNorm();
  if (!(num > 0.0) || !(den > 0.0)) {
    throw Error(ErrorCode::ZeroLoadings, "loading norms must be positive");
  }
  return std::log(num / den) / std::log(static_cast<double>(t));
}

}  // namespace ipc

#include "ipc/simulation.hpp"

#include <omp.h>

#include <cmath>
#include <numbers>

#include "ipc/factor_selection.hpp"
#include "ipc/final_estimator.hpp"
#include "ipc/inference.hpp"
#include "ipc/init_estimator.hpp"
#include "ipc/numerics.hpp"
#include "ipc/rng.hpp"

namespace ipc {
namespace {

constexpr int kDx = 2;
constexpr int kDf = 3;

// One cross-section of N(0, S) with S[m][n] = base^{|m-n|}: a unit-variance
// AR(1) along the unit index has exactly this covariance.
void draw_cross_correlated(NormalGenerator& gen, Eigen::Ref<Eigen::VectorXd> out, double base) {
  const double innov = std::sqrt(1.0 - base * base);
  out(0) = gen();
  for (Eigen::Index i = 1; i < out.size(); ++i) out(i) = base * out(i - 1) + innov * gen();
}

}  // namespace

std::pair<PanelDataset, TruthSpec> generate_dgp1(const Dgp1Spec& spec) {
  const Eigen::Index n = spec.n_units;
  const Eigen::Index t_len = spec.n_periods;
  if (n < 4 || t_len < 4) throw Error(ErrorCode::DimensionMismatch, "DGP needs N, T >= 4");
  NormalGenerator gen(spec.seed);

  TruthSpec truth;
  truth.beta_true = Eigen::VectorXd::Ones(kDx);
  truth.group_dims = {1, 1, 1};
  truth.nu_exponents = {3.0, 2.0, 1.0};

  truth.loadings_true.resize(n, kDf);
  for (Eigen::Index i = 0; i < n; ++i) {
    truth.loadings_true(i, 0) = gen(1.0, 1.0);
    truth.loadings_true(i, 1) = gen();
    truth.loadings_true(i, 2) = gen();
  }

  Eigen::VectorXd xi(t_len);
  truth.factors_true.resize(t_len, kDf);
  double mu = 0.0;
  const double xi_sd = std::sqrt(Dgp1Spec::kXiVariance);
  for (Eigen::Index s = 0; s < t_len; ++s) {
    const double t = static_cast<double>(s + 1);
    xi(s) = xi_sd * gen();
    mu += xi(s);
    truth.factors_true(s, 0) = t;
    truth.factors_true(s, 1) = mu;
    truth.factors_true(s, 2) = std::sin(8.0 * std::numbers::pi * t / static_cast<double>(t_len));
  }

  // v_{j,t} = 0.5 v_{j,t-1} + omega_{j,t}, started from its stationary law.
  const double rho = Dgp1Spec::kArCoefficient;
  std::array<Eigen::MatrixXd, kDx> v;
  Eigen::VectorXd draw(n);
  for (int j = 0; j < kDx; ++j) {
    v[j].resize(t_len, n);
    draw_cross_correlated(gen, draw, Dgp1Spec::kCrossCorrBase);
    Eigen::VectorXd prev = draw / std::sqrt(1.0 - rho * rho);
    for (Eigen::Index s = 0; s < t_len; ++s) {
      draw_cross_correlated(gen, draw, Dgp1Spec::kCrossCorrBase);
      prev = rho * prev + draw;
      v[j].row(s) = prev.transpose();
    }
  }

  Eigen::MatrixXd y(t_len, n);
  Eigen::MatrixXd x(t_len, n * kDx);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double loading_abs = truth.loadings_true.row(i).cwiseAbs().sum();
    for (Eigen::Index s = 0; s < t_len; ++s) {
      const double t = static_cast<double>(s + 1);
      const double common = (loading_abs + std::abs(xi(s)) + std::abs(truth.factors_true(s, 2))) /
                            static_cast<double>(kDx);
      double xb = 0.0;
      for (int j = 0; j < kDx; ++j) {
        const double trend = std::pow(t / 4.0, static_cast<double>(j) / 4.0);
        const double value = common + trend + v[j](s, i);
        x(s, i * kDx + j) = value;
        xb += value * truth.beta_true(j);
      }
      y(s, i) = xb + truth.factors_true.row(s).dot(truth.loadings_true.row(i)) + gen();
    }
  }
  return {PanelDataset(std::move(y), std::move(x), kDx), std::move(truth)};
}

double projector_distance(const Eigen::MatrixXd& f_hat, const Eigen::MatrixXd& f_true) {
  if (f_hat.cols() > 0 && f_true.cols() > 0 && f_hat.rows() != f_true.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "factor matrices must have the same rows");
  }
  const Eigen::MatrixXd qa = orthonormal_basis(f_hat);
  const Eigen::MatrixXd qb = orthonormal_basis(f_true);
  if (qa.cols() == 0 || qb.cols() == 0) {
    return std::sqrt(static_cast<double>(qa.cols() + qb.cols()));
  }
  // |P_a - P_b|^2 = |M_b Q_a|^2 + |M_a Q_b|^2; avoids cancellation in k + m - 2|Q_a'Q_b|^2
  // when the spans nearly coincide.
  const Eigen::MatrixXd cross = qb.transpose() * qa;
  const double sq = (qa - qb * cross).squaredNorm() + (qb - qa * cross.transpose()).squaredNorm();
  return std::sqrt(sq);
}

ReplicationRecord run_replication(const Dgp1Spec& spec, const IpcConfig& config) {
  ReplicationRecord rec;
  try {
    const auto [data, truth] = generate_dgp1(spec);
    validate(data, config);
    const InitResult init = fit_initial(data, config);
    const std::vector<FactorGroup> groups = iterate_groups(data, init, config);
    const IpcFit fit = fit_final(data, init, groups, config.delta);
    for (const auto& g : fit.groups) rec.group_dims.push_back(g.dim);

    const WaldSpec spec_h0 = WaldSpec::joint(truth.beta_true);
    std::array<InferenceResult, 4> tests = {
        wald_variant(data, fit, spec_h0, WaldVariant::AtBeta0),
        wald_variant(data, fit, spec_h0, WaldVariant::AtBeta1),
        wald_test(data, fit, spec_h0),
        wald_variant(data, fit, spec_h0, WaldVariant::AtOracle, truth.factors_true),
    };
    for (std::size_t k = 0; k < tests.size(); ++k) {
      rec.sq_error[k] = (tests[k].beta - truth.beta_true).squaredNorm();
      rec.rejected[k] = tests[k].p_value < 0.05;
    }
    const double dist = projector_distance(fit.factors_combined, truth.factors_true);
    rec.projector_sq = dist * dist;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

McResult aggregate_replications(const Dgp1Spec& spec, std::vector<ReplicationRecord> records) {
  McResult out;
  out.n_units = spec.n_units;
  out.n_periods = spec.n_periods;
  out.seed = spec.seed;
  out.reps = static_cast<int>(records.size());
  int ok = 0;
  int joint = 0;
  std::array<int, 3> per_group{};
  std::array<double, 4> sq{};
  std::array<int, 4> rejections{};
  double proj = 0.0;
  for (const auto& rec : records) {
    if (!rec.ok) {
      ++out.failures;
      continue;
    }
    ++ok;
    if (rec.group_dims == std::vector<int>{1, 1, 1}) ++joint;
    for (std::size_t g = 0; g < per_group.size(); ++g) {
      if (rec.group_dims.size() > g && rec.group_dims[g] == 1) ++per_group[g];
    }
    for (std::size_t k = 0; k < 4; ++k) {
      sq[k] += rec.sq_error[k];
      rejections[k] += rec.rejected[k] ? 1 : 0;
    }
    proj += rec.projector_sq;
  }
  if (ok > 0) {
    const double denom = static_cast<double>(ok);
    out.joint_selection_freq = joint / denom;
    for (std::size_t g = 0; g < per_group.size(); ++g) out.per_group_freq[g] = per_group[g] / denom;
    for (std::size_t k = 0; k < 4; ++k) {
      out.rmse_beta[k] = std::sqrt(sq[k] / denom);
      out.wald_size[k] = rejections[k] / denom;
    }
    out.rmse_projector = std::sqrt(proj / denom);
  }
  out.records = std::move(records);
  return out;
}

McResult run_monte_carlo(const Dgp1Spec& spec, int reps, const IpcConfig& config,
                         int parallelism) {
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be >= 1");
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(reps));
  const int threads = std::max(1, parallelism);
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (int r = 0; r < reps; ++r) {
    Dgp1Spec rep_spec = spec;
    rep_spec.seed = spec.seed + static_cast<std::uint64_t>(r);
    records[r] = run_replication(rep_spec, config);
  }
  McResult out = aggregate_replications(spec, std::move(records));
  if (out.failures * 100 > out.reps) {
    std::string first;
    for (const auto& rec : out.records)
      if (!rec.ok) {
        first = rec.error;
        break;
      }
    throw Error(ErrorCode::TooManyFailures, std::to_string(out.failures) + " of " +
                                                std::to_string(out.reps) +
                                                " replications failed; first error: " + first);
  }
  return out;
}

}  // namespace ipc

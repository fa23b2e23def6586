#include "ipc/init_estimator.hpp"

#include <atomic>
#include <cmath>

#include "ipc/kernels.hpp"
#include "ipc/numerics.hpp"
#include "ipc/rng.hpp"

namespace ipc {
namespace {

std::atomic<std::uint64_t> g_violations{0};
std::atomic<std::uint64_t> g_runs{0};

}  // namespace

std::uint64_t als_monotonicity_violations() { return g_violations.load(); }
std::uint64_t als_runs() { return g_runs.load(); }

Eigen::VectorXd beta_given_f(const PanelDataset& data, const Eigen::MatrixXd& f) {
  if (f.rows() != data.n_periods()) {
    throw Error(ErrorCode::DimensionMismatch, "F must have T rows");
  }
  const Eigen::MatrixXd q = orthonormal_basis(f);
  const auto moments = kernels::omp::projected_moments(data, q, data.y());
  return spd_solve(moments.gram, moments.cross, ErrorCode::SingularDesign,
                   "sum_i X_i'M_F X_i");
}

Eigen::MatrixXd f_given_beta(const PanelDataset& data, const Eigen::VectorXd& beta,
                             Eigen::Index k, double delta) {
  if (k > std::min(data.n_units(), data.n_periods())) {
    throw Error(ErrorCode::DimensionMismatch, "k exceeds min(N, T)");
  }
  if (k == 0) return Eigen::MatrixXd(data.n_periods(), 0);
  const Eigen::MatrixXd u = data.residual(beta);
  const Eigen::MatrixXd sigma = kernels::omp::second_moment(u);
  const SymEigen eig = sym_eigh_top(sigma, k);
  return std::pow(static_cast<double>(data.n_periods()), 0.5 * delta) * eig.vectors;
}

double concentrated_ssr(const PanelDataset& data, const Eigen::VectorXd& beta,
                        const Eigen::MatrixXd& f) {
  const Eigen::MatrixXd q = orthonormal_basis(f);
  return kernels::omp::projected_sq_norms(q, data.residual(beta)).sum();
}

Eigen::VectorXd two_way_fe_beta(const PanelDataset& data) {
  const Eigen::Index dx = data.n_regressors();
  auto demean = [&](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd time_means = m.rowwise().mean();
    const Eigen::RowVectorXd unit_means = m.colwise().mean();
    const double grand = m.mean();
    Eigen::MatrixXd out = m;
    out.colwise() -= time_means;
    out.rowwise() -= unit_means;
    out.array() += grand;
    return out;
  };
  const Eigen::MatrixXd y = demean(data.y());
  std::vector<Eigen::MatrixXd> xs;
  for (Eigen::Index j = 0; j < dx; ++j) xs.push_back(demean(data.regressor(j)));
  Eigen::MatrixXd gram(dx, dx);
  Eigen::VectorXd cross(dx);
  for (Eigen::Index a = 0; a < dx; ++a) {
    cross(a) = (xs[a].array() * y.array()).sum();
    for (Eigen::Index b = 0; b < dx; ++b) gram(a, b) = (xs[a].array() * xs[b].array()).sum();
  }
  return spd_solve(gram, cross, ErrorCode::SingularDesign, "two-way within Gram matrix");
}

InitResult run_als(const PanelDataset& data, const IpcConfig& config,
                   const Eigen::VectorXd& beta_start) {
  g_runs.fetch_add(1);
  InitResult out;
  out.beta0 = beta_start;
  out.f0 = f_given_beta(data, out.beta0, config.d_max, config.delta);
  double prev = concentrated_ssr(data, out.beta0, out.f0);
  out.ssr_path.push_back(prev);
  const double ssr_start = prev;
  // Below this the fit is exact up to round-off and SSR only jitters.
  const double perfect_fit = 1e-24 * data.y().squaredNorm();
  std::uint64_t violations = 0;
  for (int it = 1; it <= config.als_max_iter; ++it) {
    Eigen::VectorXd beta = beta_given_f(data, out.f0);
    Eigen::MatrixXd f = f_given_beta(data, beta, config.d_max, config.delta);
    const double ssr = concentrated_ssr(data, beta, f);
    out.beta0 = std::move(beta);
    out.f0 = std::move(f);
    out.ssr_path.push_back(ssr);
    out.iterations = it;
    if (ssr > prev + 1e-10 * ssr_start + perfect_fit) ++violations;
    const double rel = std::abs(prev - ssr) / std::max(prev, 1e-300);
    prev = ssr;
    if (rel < config.als_tol || ssr <= perfect_fit) {
      out.converged = true;
      break;
    }
  }
  if (violations) g_violations.fetch_add(violations);
  return out;
}

InitResult fit_initial(const PanelDataset& data, const IpcConfig& config) {
  validate(data, config);
  const Eigen::VectorXd start = config.init_rule == InitRule::TwoWayFE
                                    ? two_way_fe_beta(data)
                                    : beta_given_f(data, Eigen::MatrixXd(data.n_periods(), 0));
  InitResult best = run_als(data, config, start);
  for (int s = 1; s < config.n_starts; ++s) {
    NormalGenerator gen(config.seed + static_cast<std::uint64_t>(s));
    Eigen::MatrixXd f_rand(data.n_periods(), config.d_max);
    for (Eigen::Index c = 0; c < f_rand.cols(); ++c)
      for (Eigen::Index r = 0; r < f_rand.rows(); ++r) f_rand(r, c) = gen();
    InitResult candidate = run_als(data, config, beta_given_f(data, f_rand));
    if (candidate.ssr_path.back() < best.ssr_path.back()) best = std::move(candidate);
  }
  return best;
}

}  // namespace ipc

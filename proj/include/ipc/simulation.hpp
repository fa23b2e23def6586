#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ipc/model.hpp"

namespace ipc {

/// Artificial panel with a linear trend, a driftless random walk and a
/// cycle as factors (one factor per group, decreasing strength), two
/// regressors correlated with the common component, and beta = (1, 1).
struct Dgp1Spec {
  Eigen::Index n_units = 40;
  Eigen::Index n_periods = 40;
  std::uint64_t seed = 0;

  static constexpr double kArCoefficient = 0.5;
  static constexpr double kCrossCorrBase = 0.5;
  static constexpr double kXiVariance = 0.25;
};

/// Deterministic in `spec.seed`.
std::pair<PanelDataset, TruthSpec> generate_dgp1(const Dgp1Spec& spec);

/// Frobenius distance |P_A - P_B| between the projectors onto span(A) and
/// span(B). An empty argument contributes a zero projector.
double projector_distance(const Eigen::MatrixXd& f_hat, const Eigen::MatrixXd& f_true);

enum McEstimator : std::size_t { kBeta0 = 0, kBeta1 = 1, kBeta = 2, kBetaOracle = 3 };
inline constexpr std::array<const char*, 4> kMcEstimatorNames = {"beta0", "beta1", "beta",
                                                                 "beta_oracle"};

/// One Monte Carlo replication.
struct ReplicationRecord {
  bool ok = false;
  std::string error;
  std::vector<int> group_dims;
  std::array<double, 4> sq_error{};  // |beta_hat - beta_true|^2 per estimator
  double projector_sq = 0.0;
  std::array<bool, 4> rejected{};  // 5% Wald rejection of H0: beta = beta_true
};

struct McResult {
  Eigen::Index n_units = 0;
  Eigen::Index n_periods = 0;
  std::uint64_t seed = 0;
  int reps = 0;
  int failures = 0;
  double joint_selection_freq = 0.0;
  std::array<double, 3> per_group_freq{};
  std::array<double, 4> rmse_beta{};
  double rmse_projector = 0.0;
  std::array<double, 4> wald_size{};
  std::vector<ReplicationRecord> records;
};

/// Fits one draw and records every Monte Carlo metric. Never throws;
/// failures are reported through `ok`/`error`.
ReplicationRecord run_replication(const Dgp1Spec& spec, const IpcConfig& config);

/// Replication r uses seed spec.seed + r, so the result does not depend on
/// `parallelism`. Throws TooManyFailures when more than 1% of replications
/// fail.
McResult run_monte_carlo(const Dgp1Spec& spec, int reps, const IpcConfig& config,
                         int parallelism);

/// Fold of per-replication records (in index order) into the aggregates.
McResult aggregate_replications(const Dgp1Spec& spec, std::vector<ReplicationRecord> records);

}  // namespace ipc

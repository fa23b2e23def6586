#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ipc/init_estimator.hpp"
#include "ipc/model.hpp"

namespace ipc {

/// Outcome of the thresholded eigenvalue-ratio rule for one group.
struct RatioDecision {
  int chosen_d = 0;
  /// Objective at d = 0..d_max.
  std::vector<double> criterion_values;
  double threshold = 0.0;
  /// lambda_d / lambda_0 >= threshold, for d = 0..d_max.
  std::vector<bool> passed_indicator;
};

/// Selects d in 0..d_max minimizing
///   (lambda_{d+1}/lambda_d) * 1(lambda_d/mock >= tau) + 1(lambda_d/mock < tau)
/// with lambda_0 = mock. `eigenvalues` holds lambda_1..lambda_{d_max+1} in
/// descending order. Ties go to the smallest d.
RatioDecision eigen_ratio_select(std::span<const double> eigenvalues, double mock, double tau);

/// N^{-1} sum_i (y_i - X_i beta0)' M_F (y_i - X_i beta0) for the previously
/// extracted factors F (may be empty).
double mock_eigenvalue(const PanelDataset& data, const Eigen::VectorXd& beta0,
                       const Eigen::MatrixXd& prior_factors);

/// 1 / ln(max(anchor, N)). Throws DegenerateThreshold when max(anchor, N) <= e.
double threshold_tau(double anchor, Eigen::Index n_units);

/// Extracts group g = prior.size() + 1 given the Step 1 fit and the groups
/// already extracted. A group with dim 0 carries empty factors/loadings.
FactorGroup extract_group(const PanelDataset& data, const InitResult& init,
                          const std::vector<FactorGroup>& prior, const IpcConfig& config);

/// Thrown when the group loop hits its hard budget (more than d_max groups,
/// or accumulated dimensions leaving no room below T) before a dim-0 group.
class GroupBudgetExceeded : public Error {
 public:
  GroupBudgetExceeded(std::vector<FactorGroup> partial, const std::string& message)
      : Error(ErrorCode::GroupBudgetExceeded, message), partial_(std::move(partial)) {}

  const std::vector<FactorGroup>& partial() const { return partial_; }

 private:
  std::vector<FactorGroup> partial_;
};

/// Repeats extract_group until a group selects dimension 0; returns the
/// groups with dim >= 1 in extraction order.
std::vector<FactorGroup> iterate_groups(const PanelDataset& data, const InitResult& init,
                                        const IpcConfig& config);

/// Horizontal concatenation of group factors (T x d_f) and loadings (N x d_f).
Eigen::MatrixXd combine_factors(const std::vector<FactorGroup>& groups, Eigen::Index t);
Eigen::MatrixXd combine_loadings(const std::vector<FactorGroup>& groups, Eigen::Index n);

}  // namespace ipc

#pragma once

// Per-unit reductions that dominate the estimator's cost.
//
// Every kernel exists twice: `serial` is the plain loop over units kept as
// the reference, `omp` distributes the same work with OpenMP. The omp
// variants produce results that do not depend on the thread count: per-unit
// partial results land in fixed slots and are folded in unit order, and the
// second-moment product is cut into fixed-width column panels.

#include <Eigen/Dense>

#include "ipc/model.hpp"

namespace ipc::kernels {

/// sum_i X_i' M X_i and sum_i X_i' M v_i for an orthonormal basis Q of the
/// projected-out space (M = I - QQ'; Q may have zero columns).
struct ProjectedMoments {
  Eigen::MatrixXd gram;
  Eigen::VectorXd cross;
};

namespace serial {

/// N^{-1} sum_i u_i u_i' for the T x N matrix U.
Eigen::MatrixXd second_moment(const Eigen::MatrixXd& u);

ProjectedMoments projected_moments(const PanelDataset& data, const Eigen::MatrixXd& q,
                                   const Eigen::MatrixXd& targets);

/// u_i' M u_i for every column of U.
Eigen::VectorXd projected_sq_norms(const Eigen::MatrixXd& q, const Eigen::MatrixXd& u);

/// Output block i = sum_j block_j * a(i, j), blocks of `width` columns.
Eigen::MatrixXd combine_units(const Eigen::MatrixXd& blocks, Eigen::Index width,
                              const Eigen::MatrixXd& a);

/// sum_i w_i B_i' B_i over `width`-column unit blocks (w_i = 1 when empty).
Eigen::MatrixXd unit_gram(const Eigen::MatrixXd& blocks, Eigen::Index width,
                          const Eigen::VectorXd& weights = Eigen::VectorXd());

}  // namespace serial

namespace omp {

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& u);
ProjectedMoments projected_moments(const PanelDataset& data, const Eigen::MatrixXd& q,
                                   const Eigen::MatrixXd& targets);
Eigen::VectorXd projected_sq_norms(const Eigen::MatrixXd& q, const Eigen::MatrixXd& u);
Eigen::MatrixXd combine_units(const Eigen::MatrixXd& blocks, Eigen::Index width,
                              const Eigen::MatrixXd& a);
Eigen::MatrixXd unit_gram(const Eigen::MatrixXd& blocks, Eigen::Index width,
                          const Eigen::VectorXd& weights = Eigen::VectorXd());

}  // namespace omp

/// M_Q applied to every column of a T x m matrix.
Eigen::MatrixXd annihilate(const Eigen::MatrixXd& q, const Eigen::MatrixXd& v);

}  // namespace ipc::kernels

#pragma once

#include <Eigen/Dense>

#include "ipc/error.hpp"

namespace ipc {

/// Eigen-decomposition of a real symmetric matrix.
///
/// `values` are sorted in descending order and column k of `vectors` pairs
/// with `values[k]`. Each column is sign-normalized so that its entry of
/// largest magnitude is positive (lowest index wins ties).
struct SymEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full spectrum of a symmetric matrix. Throws NonSymmetric or NonFinite.
SymEigen sym_eigh(const Eigen::MatrixXd& a);

/// Leading `k` eigenpairs of a symmetric matrix, same conventions as sym_eigh.
SymEigen sym_eigh_top(const Eigen::MatrixXd& a, Eigen::Index k);

/// Orthonormal basis (T x k) of span(F). Throws RankDeficient when the Gram
/// matrix F'F has smallest/largest eigenvalue ratio at or below 1e-12.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& f);

/// M_F V = V - F (F'F)^{-1} F' V. An empty F (zero columns) returns V.
Eigen::MatrixXd annihilator_apply(const Eigen::MatrixXd& f, const Eigen::MatrixXd& v);

/// Dense projector P_F (T x T); zero matrix for empty F.
Eigen::MatrixXd projector(const Eigen::MatrixXd& f);

/// Smallest/largest eigenvalue ratio of a symmetric positive semidefinite
/// matrix; 0 when the matrix is zero.
double gram_condition_ratio(const Eigen::MatrixXd& gram);

/// Solves A x = B for symmetric positive definite A. Throws `code` when the
/// eigenvalue ratio of A is at or below 1e-12 (condition number above 1e12).
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, ErrorCode code,
                          const char* what);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double regularized_gamma_q(double a, double x);

/// P(chi2(k) > x). Throws InvalidDomain for x < 0 or k < 1.
double chi2_sf(double x, int k);

}  // namespace ipc

#pragma once

#include <Eigen/Dense>

#include "ipc/model.hpp"
#include "ipc/rng.hpp"

namespace ipc::testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, NormalGenerator& gen) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = gen();
  return m;
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index m, NormalGenerator& gen) {
  const Eigen::MatrixXd a = gaussian(m, m, gen);
  return 0.5 * (a + a.transpose());
}

// Panel with `d_f` Gaussian factors, unit-variance noise scaled by
// `noise`, and beta = (1, ..., 1).
inline PanelDataset random_panel(Eigen::Index n, Eigen::Index t, Eigen::Index dx, int d_f,
                                 double noise, std::uint64_t seed) {
  NormalGenerator gen(seed);
  const Eigen::MatrixXd f = gaussian(t, d_f, gen);
  const Eigen::MatrixXd g = gaussian(n, d_f, gen);
  Eigen::MatrixXd x = gaussian(t, n * dx, gen);
  Eigen::MatrixXd y = f * g.transpose() + noise * gaussian(t, n, gen);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dx; ++j) {
      if (d_f > 0) x.col(i * dx + j) += 0.5 * f.col(0) * g(i, 0);
      y.col(i) += x.col(i * dx + j);
    }
  }
  return PanelDataset(std::move(y), std::move(x), dx);
}

// Dense oracles, written independently of the library code paths.
inline Eigen::MatrixXd dense_projector(const Eigen::MatrixXd& f) {
  if (f.cols() == 0) return Eigen::MatrixXd::Zero(f.rows(), f.rows());
  return f * (f.transpose() * f).inverse() * f.transpose();
}

inline Eigen::MatrixXd dense_annihilator(const Eigen::MatrixXd& f) {
  return Eigen::MatrixXd::Identity(f.rows(), f.rows()) - dense_projector(f);
}

inline Eigen::MatrixXd unit_x(const PanelDataset& d, Eigen::Index i) { return d.x_unit(i); }

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace ipc::testing

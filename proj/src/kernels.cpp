#include "ipc/kernels.hpp"

#include <omp.h>

#include <vector>

namespace ipc::kernels {
namespace {

constexpr Eigen::Index kPanelWidth = 32;

void check_targets(const PanelDataset& data, const Eigen::MatrixXd& q,
                   const Eigen::MatrixXd& targets) {
  if (targets.rows() != data.n_periods() || targets.cols() != data.n_units() ||
      q.rows() != data.n_periods()) {
    throw Error(ErrorCode::DimensionMismatch, "projected_moments: shape mismatch");
  }
}

}  // namespace

Eigen::MatrixXd annihilate(const Eigen::MatrixXd& q, const Eigen::MatrixXd& v) {
  if (q.cols() == 0) return v;
  Eigen::MatrixXd out = v;
  out.noalias() -= q * (q.transpose() * v);
  return out;
}

namespace serial {

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& u) {
  const Eigen::Index t = u.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    for (Eigen::Index c = 0; c < t; ++c) {
      const double uc = u(c, i);
      for (Eigen::Index r = 0; r < t; ++r) s(r, c) += u(r, i) * uc;
    }
  }
  return s / static_cast<double>(u.cols());
}

ProjectedMoments projected_moments(const PanelDataset& data, const Eigen::MatrixXd& q,
                                   const Eigen::MatrixXd& targets) {
  check_targets(data, q, targets);
  const Eigen::Index dx = data.n_regressors();
  ProjectedMoments out{Eigen::MatrixXd::Zero(dx, dx), Eigen::VectorXd::Zero(dx)};
  for (Eigen::Index i = 0; i < data.n_units(); ++i) {
    const Eigen::MatrixXd mx = annihilate(q, data.x_unit(i));
    out.gram += mx.transpose() * mx;
    out.cross += mx.transpose() * targets.col(i);
  }
  return out;
}

Eigen::VectorXd projected_sq_norms(const Eigen::MatrixXd& q, const Eigen::MatrixXd& u) {
  Eigen::VectorXd out(u.cols());
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    const Eigen::VectorXd mu = annihilate(q, u.col(i));
    out(i) = mu.squaredNorm();
  }
  return out;
}

Eigen::MatrixXd combine_units(const Eigen::MatrixXd& blocks, Eigen::Index width,
                              const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(blocks.rows(), blocks.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.middleCols(i * width, width) += a(i, j) * blocks.middleCols(j * width, width);
    }
  }
  return out;
}

Eigen::MatrixXd unit_gram(const Eigen::MatrixXd& blocks, Eigen::Index width,
                          const Eigen::VectorXd& weights) {
  const Eigen::Index n = blocks.cols() / width;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(width, width);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = blocks.middleCols(i * width, width);
    const double w = weights.size() == 0 ? 1.0 : weights(i);
    out += w * (b.transpose() * b);
  }
  return out;
}

}  // namespace serial

namespace omp {

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& u) {
  const Eigen::Index t = u.rows();
  Eigen::MatrixXd s(t, t);
  const Eigen::Index panels = (t + kPanelWidth - 1) / kPanelWidth;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index p = 0; p < panels; ++p) {
    const Eigen::Index c0 = p * kPanelWidth;
    const Eigen::Index w = std::min(kPanelWidth, t - c0);
    s.middleCols(c0, w).noalias() = u * u.middleRows(c0, w).transpose();
  }
  s /= static_cast<double>(u.cols());
  return s;
}

ProjectedMoments projected_moments(const PanelDataset& data, const Eigen::MatrixXd& q,
                                   const Eigen::MatrixXd& targets) {
  check_targets(data, q, targets);
  const Eigen::Index n = data.n_units();
  const Eigen::Index dx = data.n_regressors();
  std::vector<Eigen::MatrixXd> grams(n);
  std::vector<Eigen::VectorXd> crosses(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd mx = annihilate(q, data.x_unit(i));
    grams[i] = mx.transpose() * mx;
    crosses[i] = mx.transpose() * targets.col(i);
  }
  ProjectedMoments out{Eigen::MatrixXd::Zero(dx, dx), Eigen::VectorXd::Zero(dx)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.gram += grams[i];
    out.cross += crosses[i];
  }
  return out;
}

Eigen::VectorXd projected_sq_norms(const Eigen::MatrixXd& q, const Eigen::MatrixXd& u) {
  Eigen::VectorXd out(u.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    if (q.cols() == 0) {
      out(i) = u.col(i).squaredNorm();
    } else {
      const Eigen::VectorXd mu = u.col(i) - q * (q.transpose() * u.col(i));
      out(i) = mu.squaredNorm();
    }
  }
  return out;
}

Eigen::MatrixXd combine_units(const Eigen::MatrixXd& blocks, Eigen::Index width,
                              const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index t = blocks.rows();
  Eigen::MatrixXd out(t, blocks.cols());
  for (Eigen::Index k = 0; k < width; ++k) {
    Eigen::MatrixXd gathered(t, n);
    for (Eigen::Index j = 0; j < n; ++j) gathered.col(j) = blocks.col(j * width + k);
    const Eigen::Index panels = (n + kPanelWidth - 1) / kPanelWidth;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index p = 0; p < panels; ++p) {
      const Eigen::Index c0 = p * kPanelWidth;
      const Eigen::Index w = std::min(kPanelWidth, n - c0);
      const Eigen::MatrixXd part = gathered * a.middleRows(c0, w).transpose();
      for (Eigen::Index c = 0; c < w; ++c) out.col((c0 + c) * width + k) = part.col(c);
    }
  }
  return out;
}

Eigen::MatrixXd unit_gram(const Eigen::MatrixXd& blocks, Eigen::Index width,
                          const Eigen::VectorXd& weights) {
  const Eigen::Index n = blocks.cols() / width;
  std::vector<Eigen::MatrixXd> parts(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto b = blocks.middleCols(i * width, width);
    const double w = weights.size() == 0 ? 1.0 : weights(i);
    parts[i] = w * (b.transpose() * b);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(width, width);
  for (const auto& p : parts) out += p;
  return out;
}

}  // namespace omp
}  // namespace ipc::kernels

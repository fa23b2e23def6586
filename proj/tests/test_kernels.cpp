#include <doctest.h>
#include <omp.h>

#include "ipc/kernels.hpp"
#include "ipc/numerics.hpp"
#include "support.hpp"

using namespace ipc;
using ipc::testing::dense_annihilator;
using ipc::testing::gaussian;
using ipc::testing::max_abs;

namespace {

struct ThreadGuard {
  int saved = omp_get_max_threads();
  ~ThreadGuard() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("second moment") {
    NormalGenerator gen(71);
    for (auto [t, n] : {std::pair<Eigen::Index, Eigen::Index>{5, 3}, {40, 70}, {97, 33}}) {
      const Eigen::MatrixXd u = gaussian(t, n, gen);
      const Eigen::MatrixXd expected = u * u.transpose() / static_cast<double>(n);
      const Eigen::MatrixXd s = kernels::serial::second_moment(u);
      const Eigen::MatrixXd o = kernels::omp::second_moment(u);
      CHECK(max_abs(s - expected) < 1e-12 * max_abs(expected));
      CHECK(max_abs(o - s) < 1e-12 * max_abs(expected));
      CHECK(o == o.transpose());
    }
  }

  TEST_CASE("projected moments") {
    for (Eigen::Index k : {0, 1, 3}) {
      const PanelDataset d = ipc::testing::random_panel(23, 17, 2, 2, 1.0, 72 + k);
      NormalGenerator gen(72);
      const Eigen::MatrixXd q = k ? orthonormal_basis(gaussian(17, k, gen)) : Eigen::MatrixXd(17, 0);
      const Eigen::MatrixXd m = k ? dense_annihilator(q) : Eigen::MatrixXd::Identity(17, 17);
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(2, 2);
      Eigen::VectorXd cross = Eigen::VectorXd::Zero(2);
      for (Eigen::Index i = 0; i < 23; ++i) {
        gram += d.x_unit(i).transpose() * m * d.x_unit(i);
        cross += d.x_unit(i).transpose() * m * d.y_unit(i);
      }
      const auto s = kernels::serial::projected_moments(d, q, d.y());
      const auto o = kernels::omp::projected_moments(d, q, d.y());
      CHECK(max_abs(s.gram - gram) < 1e-10 * max_abs(gram));
      CHECK(max_abs(s.cross - cross) < 1e-10 * max_abs(cross));
      CHECK(max_abs(o.gram - s.gram) < 1e-12 * max_abs(gram));
      CHECK(max_abs(o.cross - s.cross) < 1e-12 * max_abs(cross));
    }
  }

  TEST_CASE("projected squared norms and annihilation") {
    NormalGenerator gen(73);
    const Eigen::MatrixXd q = orthonormal_basis(gaussian(20, 4, gen));
    const Eigen::MatrixXd u = gaussian(20, 50, gen);
    const Eigen::MatrixXd mu = dense_annihilator(q) * u;
    const Eigen::VectorXd expected = mu.colwise().squaredNorm().transpose();
    CHECK(max_abs(kernels::serial::projected_sq_norms(q, u) - expected) < 1e-10);
    CHECK(max_abs(kernels::omp::projected_sq_norms(q, u) - expected) < 1e-10);
    CHECK(max_abs(kernels::annihilate(q, u) - mu) < 1e-12);
  }

  TEST_CASE("unit combination and weighted gram") {
    NormalGenerator gen(74);
    const Eigen::Index n = 37, t = 11, w = 2;
    const Eigen::MatrixXd blocks = gaussian(t, n * w, gen);
    const Eigen::MatrixXd a = gaussian(n, n, gen);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(t, n * w);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        expected.middleCols(i * w, w) += blocks.middleCols(j * w, w) * a(i, j);
    CHECK(max_abs(kernels::serial::combine_units(blocks, w, a) - expected) < 1e-10);
    CHECK(max_abs(kernels::omp::combine_units(blocks, w, a) - expected) < 1e-10);

    const Eigen::VectorXd weights = gaussian(n, 1, gen).cwiseAbs();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(w, w), plain = gram;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::MatrixXd b = blocks.middleCols(i * w, w);
      gram += weights(i) * b.transpose() * b;
      plain += b.transpose() * b;
    }
    CHECK(max_abs(kernels::serial::unit_gram(blocks, w, weights) - gram) < 1e-10);
    CHECK(max_abs(kernels::omp::unit_gram(blocks, w, weights) - gram) < 1e-10);
    CHECK(max_abs(kernels::omp::unit_gram(blocks, w) - plain) < 1e-10);
  }

  TEST_CASE("parallel kernels give identical bits for any thread count") {
    ThreadGuard guard;
    const PanelDataset d = ipc::testing::random_panel(101, 45, 2, 3, 1.0, 75);
    NormalGenerator gen(75);
    const Eigen::MatrixXd q = orthonormal_basis(gaussian(45, 3, gen));
    const Eigen::MatrixXd a = gaussian(101, 101, gen);
    omp_set_num_threads(1);
    const Eigen::MatrixXd s1 = kernels::omp::second_moment(d.y());
    const auto p1 = kernels::omp::projected_moments(d, q, d.y());
    const Eigen::MatrixXd c1 = kernels::omp::combine_units(d.x(), 2, a);
    const Eigen::MatrixXd g1 = kernels::omp::unit_gram(d.x(), 2);
    for (int threads : {2, 3, 4, 8}) {
      omp_set_num_threads(threads);
      CHECK(kernels::omp::second_moment(d.y()) == s1);
      const auto p = kernels::omp::projected_moments(d, q, d.y());
      CHECK(p.gram == p1.gram);
      CHECK(p.cross == p1.cross);
      CHECK(kernels::omp::combine_units(d.x(), 2, a) == c1);
      CHECK(kernels::omp::unit_gram(d.x(), 2) == g1);
    }
  }
}

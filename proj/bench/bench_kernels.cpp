// Serial reference vs OpenMP kernels at Monte Carlo panel sizes.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "ipc/kernels.hpp"
#include "ipc/rng.hpp"

namespace {

using namespace ipc;

Eigen::MatrixXd normal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  NormalGenerator gen(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = gen();
  return m;
}

Eigen::MatrixXd basis(Eigen::Index t, Eigen::Index k) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(normal(t, k, 3)).householderQ() *
         Eigen::MatrixXd::Identity(t, k);
}

template <auto Fn>
void second_moment(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd u = normal(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(u));
}

template <auto Fn>
void projected_moments(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const PanelDataset data(normal(n, n, 1), normal(n, 2 * n, 2), 2);
  const Eigen::MatrixXd q = basis(n, 10);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(data, q, data.y()));
}

template <auto Fn>
void combine_units(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd blocks = normal(n, 2 * n, 4);
  const Eigen::MatrixXd g = normal(n, 3, 5);
  const Eigen::MatrixXd a = g * (g.transpose() * g).inverse() * g.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(blocks, 2, a));
}

template <auto Fn>
void unit_gram(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd blocks = normal(n, 2 * n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(blocks, 2, Eigen::VectorXd()));
}

}  // namespace

#define IPC_PAIR(name)                                                                 \
  BENCHMARK(name<&kernels::serial::name>)->Name(#name "/serial")->Arg(80)->Arg(160)->Arg(320); \
  BENCHMARK(name<&kernels::omp::name>)->Name(#name "/omp")->Arg(80)->Arg(160)->Arg(320)

IPC_PAIR(second_moment);
IPC_PAIR(projected_moments);
IPC_PAIR(combine_units);
IPC_PAIR(unit_gram);

BENCHMARK_MAIN();

// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "suturekit/mlp.hpp"

namespace suturekit {
namespace {

Eigen::MatrixXd randomBatch(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void BM_MlpForward(benchmark::State& state) {
  const MlpModel m({14, 400, 300, 200, 6}, 1);
  const Eigen::MatrixXd x = randomBatch(14, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(x).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(256);

void BM_MlpLossAndGradient(benchmark::State& state) {
  MlpModel m({14, 400, 300, 200, 6}, 3);
  const Eigen::MatrixXd x = randomBatch(14, 256, 4);
  const Eigen::MatrixXd y = randomBatch(6, 256, 5);
  Eigen::VectorXd grad;
  for (auto _ : state) benchmark::DoNotOptimize(m.lossAndGradient(x, y, &grad));
}
BENCHMARK(BM_MlpLossAndGradient)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace suturekit

BENCHMARK_MAIN();

// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "suturekit/nearest.hpp"
#include "suturekit/perception.hpp"
#include "suturekit/pose_estimator.hpp"

namespace suturekit {
namespace {

struct Scene {
  StereoRig rig = defaultStereoRig();
  NeedleShape shape;
  NeedleScene truth{rig, shape, RigidPose::identity(), std::nullopt};
  StereoObservation obs;

  explicit Scene(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    truth = randomScene(rig, shape, SceneSampling{}, rng);
    obs = SyntheticPerception(2.0).observe(truth, rng);
  }
};

void BM_Objective(benchmark::State& state) {
  const Scene s(1);
  EstimatorConfig cfg;
  cfg.axis_sample_count = static_cast<int>(state.range(0));
  const ReprojectionObjective obj(s.obs.masks, s.shape, s.rig, cfg, cfg.mask_pixel_cap);
  const NeedleParams x = poseToParams(s.truth.needle_pose, s.shape, s.rig.left);
  for (auto _ : state) benchmark::DoNotOptimize(obj.evaluate(x).value);
}
BENCHMARK(BM_Objective)->Arg(50)->Arg(200)->Arg(800);

void BM_Gradient(benchmark::State& state) {
  const Scene s(2);
  const EstimatorConfig cfg;
  const ReprojectionObjective obj(s.obs.masks, s.shape, s.rig, cfg, cfg.mask_pixel_cap);
  const NeedleParams x = poseToParams(s.truth.needle_pose, s.shape, s.rig.left);
  for (auto _ : state) benchmark::DoNotOptimize(obj.gradient(x));
}
BENCHMARK(BM_Gradient);

void BM_EstimateShort(benchmark::State& state) {
  const Scene s(3);
  EstimatorConfig cfg;
  cfg.max_steps = 100;
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(estimate(s.obs.masks, s.obs.hints, s.shape, s.rig, cfg).pose);
    } catch (const NoConvergenceError& e) {
      benchmark::DoNotOptimize(e.result().pose);
    }
  }
}
BENCHMARK(BM_EstimateShort)->Unit(benchmark::kMillisecond);

void BM_NearestIndex(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 640.0);
  std::vector<Vec2> points(static_cast<std::size_t>(state.range(0)));
  for (Vec2& p : points) p = Vec2(u(rng), 0.75 * u(rng));
  const NearestPointIndex index(points);
  std::vector<Vec2> queries(2000);
  for (Vec2& q : queries) q = Vec2(u(rng), 0.75 * u(rng));
  for (auto _ : state) {
    double sum = 0.0;
    for (const Vec2& q : queries) sum += index.nearestSquaredDistance(q);
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}
BENCHMARK(BM_NearestIndex)->Arg(50)->Arg(200)->Arg(1000);

void BM_Rasterize(benchmark::State& state) {
  const Scene s(5);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(s.truth.needle_pose, s.shape, s.rig.left, 2.0).size());
}
BENCHMARK(BM_Rasterize);

}  // namespace
}  // namespace suturekit

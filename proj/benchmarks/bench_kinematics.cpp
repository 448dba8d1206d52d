// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "suturekit/kinematics.hpp"
#include "suturekit/planning.hpp"

namespace suturekit {
namespace {

JointVector sampleQ(const KinematicModel& m, std::mt19937_64& rng) {
  JointVector q;
  for (int j = 0; j < 6; ++j) {
    q(j) = std::uniform_real_distribution<double>(m.limits.lo[j] + 0.01, m.limits.hi[j] - 0.01)(rng);
  }
  return q;
}

void BM_Fk(benchmark::State& state) {
  const KinematicModel m;
  std::mt19937_64 rng(1);
  const JointVector q = sampleQ(m, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fk(m, q));
}
BENCHMARK(BM_Fk);

void BM_Ik(benchmark::State& state) {
  const KinematicModel m;
  std::mt19937_64 rng(2);
  const RigidPose target = fk(m, sampleQ(m, rng));
  for (auto _ : state) benchmark::DoNotOptimize(ik(m, target).solutions.size());
}
BENCHMARK(BM_Ik);

void BM_ConstrainedIk(benchmark::State& state) {
  const KinematicModel m;
  std::mt19937_64 rng(3);
  const JointVector q = sampleQ(m, rng);
  const RigidPose target = fk(m, q);
  for (auto _ : state) benchmark::DoNotOptimize(constrainedIk(m, target, q, 0.17).size());
}
BENCHMARK(BM_ConstrainedIk);

void BM_PlanSuturePass(benchmark::State& state) {
  const SuturePorts ports{Vec3(-0.007, 0, 0), Vec3(0.007, 0, 0), Vec3::UnitZ()};
  const RigidPose start = RigidPose::fromTranslation(Vec3(0.0, 0.02, 0.05));
  for (auto _ : state) {
    benchmark::DoNotOptimize(planSuturePass(start, ports, NeedleShape{}, RigidPose::identity()).segments.size());
  }
}
BENCHMARK(BM_PlanSuturePass);

}  // namespace
}  // namespace suturekit

// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "suturekit/errors.hpp"
#include "suturekit/geometry.hpp"
#include "test_util.hpp"

namespace suturekit {
namespace {

PinholeCamera basicCamera() { return PinholeCamera(1000.0, 1000.0, 320.0, 240.0, 640, 480); }

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const Vec2 px = basicCamera().project(Vec3(0.0, 0.0, 0.1));
  EXPECT_DOUBLE_EQ(px.x(), 320.0);
  EXPECT_DOUBLE_EQ(px.y(), 240.0);
}

TEST(Project, OffAxisPoint) {
  const Vec2 px = basicCamera().project(Vec3(0.01, 0.0, 0.1));
  EXPECT_NEAR(px.x(), 420.0, 1e-12);
  EXPECT_NEAR(px.y(), 240.0, 1e-12);
}

TEST(Project, BehindCameraThrows) {
  try {
    basicCamera().project(Vec3(0.0, 0.0, -0.1));
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDepth);
  }
}

TEST(Backproject, PrincipalPointIsForward) {
  const Vec3 d = basicCamera().backprojectRay(Vec2(320.0, 240.0));
  EXPECT_NEAR((d - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(Backproject, OneFocalLengthRight) {
  const Vec3 d = basicCamera().backprojectRay(Vec2(1320.0, 240.0));
  EXPECT_NEAR((d - Vec3(1.0, 0.0, 1.0).normalized()).norm(), 0.0, 1e-15);
}

TEST(Backproject, ProjectBackprojectRoundtripProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> f(300.0, 2000.0), c(0.0, 800.0), u(-0.1, 0.1), z(0.02, 1.0),
      t(0.01, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const PinholeCamera cam(f(rng), f(rng), c(rng), c(rng), 800, 800, testing::randomPose(rng));
    const Vec3 point = cam.pose().apply(Vec3(u(rng), u(rng), z(rng)));
    const Vec2 px = cam.project(point);
    const Vec3 dir = cam.backprojectRay(px);
    ASSERT_NEAR(dir.norm(), 1.0, 1e-12);
    const Vec3 offset = point - cam.center();
    ASSERT_LT((offset - offset.dot(dir) * dir).norm(), 1e-9);
    const double scale = t(rng);
    ASSERT_LT((cam.project(cam.center() + scale * dir) - px).norm(), 1e-6);
  }
}

TEST(RigidPose, IdentityIsNeutral) {
  std::mt19937_64 rng(2);
  const RigidPose p = testing::randomPose(rng);
  const RigidPose q = compose(RigidPose::identity(), p);
  EXPECT_EQ(q.matrix(), p.matrix());
}

TEST(RigidPose, DoubleInverse) {
  std::mt19937_64 rng(3);
  const RigidPose p = testing::randomPose(rng);
  EXPECT_LT((invert(invert(p)).matrix() - p.matrix()).norm(), 1e-12);
}

TEST(RigidPose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const RigidPose p = testing::randomPose(rng);
    EXPECT_LT((compose(p, invert(p)).matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-12);
  }
}

TEST(RigidPose, TranslationsAdd) {
  const RigidPose p = compose(RigidPose::fromTranslation(Vec3(0, 0, 0.1)), RigidPose::fromTranslation(Vec3(0, 0, 0.2)));
  EXPECT_NEAR((p.translation() - Vec3(0, 0, 0.3)).norm(), 0.0, 1e-15);
  EXPECT_EQ(p.rotation(), Mat3::Identity());
}

TEST(RigidPose, ApplyMatchesHomogeneousMatrix) {
  std::mt19937_64 rng(5);
  const RigidPose p = testing::randomPose(rng);
  const Vec3 x(0.3, -0.2, 0.5);
  const Eigen::Vector4d h = p.matrix() * x.homogeneous();
  EXPECT_LT((p.apply(x) - h.head<3>()).norm(), 1e-15);
  EXPECT_LT((p.applyInverse(p.apply(x)) - x).norm(), 1e-15);
}

TEST(RigidPose, RejectsImproperRotation) {
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(RigidPose(reflect, Vec3::Zero()), Error);
  EXPECT_THROW(RigidPose(2.0 * Mat3::Identity(), Vec3::Zero()), Error);
}

TEST(RigidPose, OrthonormalityThroughLongChainsProperty) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    RigidPose acc = testing::randomPose(rng);
    for (int k = 0; k < 100; ++k) {
      const RigidPose step = testing::randomPose(rng);
      acc = (k % 3 == 0) ? invert(acc) * step : acc * step;
    }
    ASSERT_LT(orthonormalityError(acc.rotation()), 1e-8);
    ASSERT_NEAR(acc.rotation().determinant(), 1.0, 1e-8);
  }
}

TEST(Rotation, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrapAngle(kPi), kPi);
  EXPECT_NEAR(wrapAngle(-kPi), kPi, 1e-15);
  EXPECT_NEAR(wrapAngle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(wrapAngle(0.25), 0.25, 0.0);
}

TEST(Rotation, DistanceIsGeodesic) {
  EXPECT_NEAR(rotationDistance(Mat3::Identity(), rotZ(0.7)), 0.7, 1e-12);
  EXPECT_NEAR(rotationDistance(rotX(0.2), rotX(0.2) * rotY(kPi)), kPi, 1e-7);
}

TEST(Rotation, NearestRotationProjects) {
  std::mt19937_64 rng(7);
  const Mat3 r = testing::randomRotation(rng);
  Mat3 noisy = r;
  noisy(0, 1) += 1e-4;
  const Mat3 fixed = nearestRotation(noisy);
  EXPECT_LT(orthonormalityError(fixed), 1e-12);
  EXPECT_LT((fixed - r).norm(), 1e-3);
}

TEST(LookAt, AxisPointsAtTarget) {
  const Vec3 eye(0.1, 0.2, 0.3), target(0.0, 0.0, 0.0);
  const RigidPose p = lookAt(eye, target, Vec3::UnitZ() * -1.0);
  EXPECT_LT((p.rotation().col(2) - (target - eye).normalized()).norm(), 1e-12);
  const PinholeCamera cam(800, 800, 320, 240, 640, 480, p);
  EXPECT_LT((cam.project(target) - Vec2(320, 240)).norm(), 1e-9);
  EXPECT_THROW(lookAt(eye, eye, Vec3::UnitZ()), Error);
}

TEST(StereoRig, RejectsCoincidentCenters) {
  EXPECT_THROW(StereoRig(basicCamera(), basicCamera()), Error);
  const StereoRig rig(basicCamera(), PinholeCamera(1000, 1000, 320, 240, 640, 480,
                                                    RigidPose::fromTranslation(Vec3(0.02, 0, 0))));
  EXPECT_NEAR(rig.baseline(), 0.02, 1e-15);
}

}  // namespace
}  // namespace suturekit

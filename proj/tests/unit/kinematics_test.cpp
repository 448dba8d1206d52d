// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "suturekit/errors.hpp"
#include "suturekit/kinematics.hpp"
#include "test_util.hpp"

namespace suturekit {
namespace {

/// Generic serial chain: each link is a fixed transform followed by a joint
/// motion about/along a local axis.
struct Link {
  Eigen::Isometry3d fixed;
  bool prismatic;
  Vec3 axis;
};

Eigen::Isometry3d chainProduct(const KinematicModel& m, const JointVector& q) {
  Eigen::Isometry3d mount = Eigen::Isometry3d::Identity();
  mount.linear() = m.tool_mount;
  Eigen::Isometry3d offset = Eigen::Isometry3d::Identity();
  offset.translation() = Vec3(0, 0, m.insertion_offset);
  const std::array<Link, 6> links{{{Eigen::Isometry3d::Identity(), false, Vec3::UnitZ()},
                                   {Eigen::Isometry3d::Identity(), false, Vec3::UnitX()},
                                   {mount * offset, true, Vec3::UnitZ()},
                                   {Eigen::Isometry3d::Identity(), false, Vec3::UnitZ()},
                                   {Eigen::Isometry3d::Identity(), false, Vec3::UnitX()},
                                   {Eigen::Isometry3d::Identity(), false, Vec3::UnitZ()}}};
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = m.base.rotation();
  t.translation() = m.base.translation();
  for (int j = 0; j < 6; ++j) {
    t = t * links[j].fixed;
    Eigen::Isometry3d motion = Eigen::Isometry3d::Identity();
    if (links[j].prismatic) {
      motion.translation() = q(j) * links[j].axis;
    } else {
      motion.linear() = Eigen::AngleAxisd(q(j), links[j].axis).toRotationMatrix();
    }
    t = t * motion;
  }
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
  tip.translation() = Vec3(0, 0, m.pitch_to_yaw + m.yaw_to_tip);
  return t * tip;
}

JointVector randomInLimit(const KinematicModel& m, std::mt19937_64& rng, double margin = 0.05) {
  JointVector q;
  for (int j = 0; j < 6; ++j) {
    std::uniform_real_distribution<double> u(m.limits.lo[j] + (j == kPrismaticJoint ? 0.01 : margin),
                                             m.limits.hi[j] - (j == kPrismaticJoint ? 0.0 : margin));
    q(j) = u(rng);
  }
  return q;
}

KinematicModel offsetModel() {
  KinematicModel m;
  std::mt19937_64 rng(5);
  m.base = testing::randomPose(rng, 0.3);
  m.insertion_offset = 0.004;
  return m;
}

bool containsQ(const std::vector<JointVector>& sols, const JointVector& q, double tol) {
  return std::any_of(sols.begin(), sols.end(), [&](const JointVector& s) {
    JointVector d = jointDifference(s, q);
    return d.cwiseAbs().maxCoeff() <= tol;
  });
}

TEST(Fk, ZeroConfigurationWithZeroWrist) {
  KinematicModel m;
  m.pitch_to_yaw = 0.0;
  m.yaw_to_tip = 0.0;
  m.tool_mount = Mat3::Identity();
  const RigidPose p = fk(m, JointVector::Zero());
  EXPECT_LT(p.translation().norm(), 1e-15);
  EXPECT_LT((p.rotation() - Mat3::Identity()).norm(), 1e-15);
}

TEST(Fk, InsertionDisplacesAlongAxis) {
  KinematicModel m;
  JointVector q = JointVector::Zero();
  const RigidPose p0 = fk(m, q);
  q(kPrismaticJoint) = 0.1;
  const RigidPose p1 = fk(m, q);
  const Vec3 axis = m.tool_mount.col(2);
  EXPECT_LT((p1.translation() - p0.translation() - 0.1 * axis).norm(), 1e-15);
  EXPECT_LT((p1.rotation() - p0.rotation()).norm(), 1e-15);
}

TEST(Fk, MatchesTransformProductOracleProperty) {
  for (const KinematicModel& m : {KinematicModel{}, offsetModel()}) {
    std::mt19937_64 rng(100);
    std::uniform_real_distribution<double> any(-4.0, 4.0), ins(-0.1, 0.3);
    for (int i = 0; i < 1000; ++i) {
      JointVector q;
      for (int j = 0; j < 6; ++j) q(j) = any(rng);
      q(kPrismaticJoint) = ins(rng);
      const RigidPose p = fk(m, q);
      const Eigen::Isometry3d o = chainProduct(m, q);
      ASSERT_LT((p.translation() - o.translation()).cwiseAbs().maxCoeff(), 1e-12);
      ASSERT_LT((p.rotation() - o.linear()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Ik, RoundtripMembershipProperty) {
  for (const KinematicModel& m : {KinematicModel{}, offsetModel()}) {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 1000; ++i) {
      const JointVector q = randomInLimit(m, rng);
      const RigidPose target = fk(m, q);
      const IkResult r = ik(m, target);
      ASSERT_FALSE(r.singular_wrist);
      ASSERT_TRUE(containsQ(r.solutions, q, 1e-9)) << q.transpose();
      for (const JointVector& s : r.solutions) {
        const RigidPose back = fk(m, s);
        ASSERT_LT((back.translation() - target.translation()).norm(), 1e-9);
        ASSERT_LT(rotationDistance(back.rotation(), target.rotation()), 1e-9);
        ASSERT_TRUE(m.limits.contains(s));
      }
      ASSERT_TRUE(std::is_sorted(r.solutions.begin(), r.solutions.end(), [](const JointVector& a, const JointVector& b) {
        return std::lexicographical_compare(a.data(), a.data() + 6, b.data(), b.data() + 6);
      }));
    }
  }
}

TEST(Ik, GenericTargetHasWristFlipPair) {
  const KinematicModel m;
  std::mt19937_64 rng(102);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const JointVector q = randomInLimit(m, rng);
    const IkResult r = ik(m, fk(m, q));
    ASSERT_LE(r.solutions.size(), 2u);
    JointVector flip = q;
    flip(3) = wrapAngle(q(3) + kPi);
    flip(4) = -q(4);
    flip(5) = wrapAngle(q(5) + kPi);
    if (m.limits.contains(flip)) {
      ASSERT_EQ(r.solutions.size(), 2u);
      ASSERT_TRUE(containsQ(r.solutions, flip, 1e-9));
      ++checked;
    }
  }
  EXPECT_GT(checked, 900);
}

TEST(Ik, OutOfLimitBranchesAreRetrievable) {
  const KinematicModel m;
  std::mt19937_64 rng(103);
  for (int i = 0; i < 100; ++i) {
    const JointVector q = randomInLimit(m, rng);
    const RigidPose target = fk(m, q);
    IkOptions opt;
    opt.include_out_of_limits = true;
    const IkResult all = ik(m, target, opt);
    const IkResult in = ik(m, target);
    ASSERT_GE(all.solutions.size(), in.solutions.size());
    ASSERT_EQ(all.solutions.size(), 4u);
    for (const JointVector& s : all.solutions) {
      ASSERT_LT((fk(m, s).translation() - target.translation()).norm(), 1e-9);
    }
  }
}

TEST(Ik, SingularWristUsesGivenQ4) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.1, 0.7, 0.0, -0.4;
  IkOptions opt;
  opt.singular_q4 = 0.25;
  const IkResult r = ik(m, fk(m, q), opt);
  EXPECT_TRUE(r.singular_wrist);
  ASSERT_EQ(r.solutions.size(), 1u);
  const JointVector& s = r.solutions.front();
  EXPECT_NEAR(s(3), 0.25, 1e-12);
  EXPECT_NEAR(s(4), 0.0, 1e-12);
  EXPECT_NEAR(wrapAngle(s(3) + s(5) - (q(3) + q(5))), 0.0, 1e-9);
  EXPECT_LT((fk(m, s).matrix() - fk(m, q).matrix()).norm(), 1e-9);
}

TEST(Ik, UnreachableTargets) {
  const KinematicModel m;
  JointVector q = JointVector::Zero();
  // Wrist center on the RCM.
  try {
    ik(m, fk(m, q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
  }
  q(kPrismaticJoint) = 0.3;
  try {
    ik(m, fk(m, q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
  }
}

TEST(ConstrainedIk, ContainsTrueConfiguration) {
  const KinematicModel m;
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const JointVector q = randomInLimit(m, rng, 0.3);
    JointVector dq;
    for (int j = 0; j < 6; ++j) dq(j) = 5.0 * kDegToRad * u(rng);
    dq(kPrismaticJoint) /= m.prismatic_scale;
    const auto sols = constrainedIk(m, fk(m, q), q + dq, 10.0 * kDegToRad);
    ASSERT_TRUE(containsQ(sols, q, 1e-9));
  }
}

TEST(ConstrainedIk, TenDegreeBoundSelectsOneBranch) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3;  // flip differs by 2.4 rad in q5
  const auto sols = constrainedIk(m, fk(m, q), q, 10.0 * kDegToRad);
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_LT(jointDifference(sols.front(), q).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ConstrainedIk, ZeroBound) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3;
  EXPECT_EQ(constrainedIk(m, fk(m, q), q, 0.0).size(), 1u);
  JointVector off = q;
  off(0) += 1e-3;
  EXPECT_TRUE(constrainedIk(m, fk(m, q), off, 0.0).empty());
}

TEST(ConstrainedIk, SubsetOfIkAndMonotoneInBoundProperty) {
  const KinematicModel m;
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::array<double, 5> bounds{0.01, 0.1, 0.5, 2.0, kPi};
  for (int i = 0; i < 300; ++i) {
    const JointVector q = randomInLimit(m, rng);
    JointVector q_msr = q;
    for (int j = 0; j < 6; ++j) q_msr(j) += 0.3 * u(rng);
    q_msr(kPrismaticJoint) = q(kPrismaticJoint) + 0.01 * u(rng);
    const RigidPose target = fk(m, q);
    const auto all = ik(m, target).solutions;
    std::size_t previous = 0;
    for (const double b : bounds) {
      const auto sols = constrainedIk(m, target, q_msr, b);
      ASSERT_GE(sols.size(), previous);
      previous = sols.size();
      for (const JointVector& s : sols) {
        ASSERT_TRUE(containsQ(all, s, 0.0));
        ASSERT_LE(jointDistance(m, s, q_msr), b + 1e-9);
      }
    }
  }
}

TEST(JointDistance, WrapsAndScales) {
  const KinematicModel m;
  JointVector a = JointVector::Zero(), b = JointVector::Zero();
  a(0) = kPi - 0.01;
  b(0) = -kPi + 0.01;
  EXPECT_NEAR(jointDistance(m, a, b), 0.02, 1e-12);
  b(0) = a(0);
  a(kPrismaticJoint) = 0.003;
  EXPECT_NEAR(jointDistance(m, a, b), 0.03, 1e-15);
  EXPECT_NEAR(jointDifference(a, b)(kPrismaticJoint), 0.003, 1e-18);
}

TEST(VerifyUnique, TenDegreesAtWellConditionedConfiguration) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3;
  EXPECT_EQ(verifyUnique(m, q, 10.0 * kDegToRad, 1000, 7), 1.0);
}

TEST(VerifyUnique, UnconstrainedBoundAdmitsTheFlip) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3;
  EXPECT_LT(verifyUnique(m, q, kPi - 1e-6, 200, 8), 1.0);
}

TEST(VerifyUnique, SingleTrialNearZeroOffset) {
  const KinematicModel m;
  JointVector q;
  q << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3;
  EXPECT_EQ(verifyUnique(m, q, 1e-12, 1, 9), 1.0);
  EXPECT_THROW(verifyUnique(m, q, 0.1, 0, 9), Error);
}

TEST(KinematicModel, Validation) {
  KinematicModel m;
  EXPECT_NO_THROW(m.validate());
  m.yaw_to_tip = -1.0;
  EXPECT_THROW(m.validate(), Error);
  m = KinematicModel{};
  m.limits.lo[0] = m.limits.hi[0];
  EXPECT_THROW(m.validate(), Error);
  m = KinematicModel{};
  m.prismatic_scale = 0.0;
  EXPECT_THROW(m.validate(), Error);
}

}  // namespace
}  // namespace suturekit

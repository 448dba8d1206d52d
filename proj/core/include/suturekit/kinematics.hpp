// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "suturekit/geometry.hpp"

namespace suturekit {

/// q1, q2 revolute (rad); q3 prismatic (m); q4..q6 revolute (rad).
using JointVector = Eigen::Matrix<double, 6, 1>;

inline constexpr int kPrismaticJoint = 2;

struct JointLimits {
  std::array<double, 6> lo{-kPi / 2, -kPi / 3, 0.0, -kPi, -kPi / 2, -kPi};
  std::array<double, 6> hi{kPi / 2, kPi / 3, 0.24, kPi, kPi / 2, kPi};

  bool contains(const JointVector& q, double slack = 1e-12) const;
};

/// RCM manipulator: yaw q1 about the base z axis, pitch q2 about the rotated x
/// axis, then a fixed tool-mount rotation, insertion q3 along the mount's z
/// axis, and a Z-X-Z wrist (q4, q5, q6) whose axes meet at the wrist center.
/// The tool tip sits pitch_to_yaw + yaw_to_tip beyond the wrist center along
/// the final z axis.
struct KinematicModel {
  RigidPose base;  ///< world_from_rcm
  Mat3 tool_mount = rotX(kPi / 2);
  double insertion_offset = 0.0;  ///< RCM to wrist center at q3 = 0, meters
  double pitch_to_yaw = 0.0091;
  double yaw_to_tip = 0.0102;
  JointLimits limits;
  /// Radians per meter used to put the prismatic joint on the angular scale of
  /// the constrained-IK norm.
  double prismatic_scale = 10.0;

  /// Throws kInvalidArgument on negative lengths, lo >= hi, a non-rotation
  /// tool mount or a non-positive prismatic scale.
  void validate() const;
  double wristLength() const { return pitch_to_yaw + yaw_to_tip; }
};

/// Tool-tip pose in the world frame. Limits are not enforced.
RigidPose fk(const KinematicModel& model, const JointVector& q);

/// Per-joint difference a - b with revolute entries wrapped to (-pi, pi].
JointVector jointDifference(const JointVector& a, const JointVector& b);

/// max_j |a_j - b_j| with revolute entries wrapped and the prismatic entry
/// multiplied by the model's prismatic scale.
double jointDistance(const KinematicModel& model, const JointVector& a, const JointVector& b);

struct IkOptions {
  /// Keep branches that violate joint limits.
  bool include_out_of_limits = false;
  /// q4 assigned at a wrist singularity, normally the measured q4.
  double singular_q4 = 0.0;
};

struct IkResult {
  std::vector<JointVector> solutions;  ///< lexicographic order
  bool singular_wrist = false;
};

/// Closed-form inverse kinematics, up to two arm branches times two wrist
/// branches. Revolute angles are wrapped to (-pi, pi]. Throws kUnreachable when
/// the wrist center coincides with the RCM or the insertion leaves its range.
IkResult ik(const KinematicModel& model, const RigidPose& target, const IkOptions& options = {});

/// In-limit IK solutions within `bound` of q_msr under jointDistance. A
/// singular wrist takes q4 from q_msr.
std::vector<JointVector> constrainedIk(const KinematicModel& model, const RigidPose& target,
                                       const JointVector& q_msr, double bound);

/// Fraction of random offsets dq, uniform in [-bound, bound] per joint
/// (prismatic entry divided by the prismatic scale), for which constrainedIk
/// at fk(q_msr + dq) returns exactly one solution.
double verifyUnique(const KinematicModel& model, const JointVector& q_msr, double bound,
                    int trial_count, std::uint64_t rng_seed);

}  // namespace suturekit

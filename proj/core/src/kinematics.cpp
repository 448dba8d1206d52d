// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "suturekit/errors.hpp"

namespace suturekit {

bool JointLimits::contains(const JointVector& q, double slack) const {
  for (int j = 0; j < 6; ++j) {
    if (!(q(j) >= lo[j] - slack && q(j) <= hi[j] + slack)) return false;
  }
  return true;
}

void KinematicModel::validate() const {
  if (!(pitch_to_yaw >= 0.0) || !(yaw_to_tip >= 0.0) || !std::isfinite(insertion_offset)) {
    throw Error(ErrorCode::kInvalidArgument, "wrist lengths must be >= 0");
  }
  for (int j = 0; j < 6; ++j) {
    if (!(limits.lo[j] < limits.hi[j])) {
      throw Error(ErrorCode::kInvalidArgument, "joint limits need lo < hi");
    }
  }
  if (orthonormalityError(tool_mount) > 1e-9 || std::abs(tool_mount.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "tool mount is not a rotation");
  }
  if (!(prismatic_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "prismatic scale must be positive");
  }
}

namespace {

Mat3 shaftRotation(const KinematicModel& model, double q1, double q2) {
  return rotZ(q1) * rotX(q2) * model.tool_mount;
}

}  // namespace

RigidPose fk(const KinematicModel& model, const JointVector& q) {
  const Mat3 shaft = shaftRotation(model, q(0), q(1));
  const Mat3 wrist = rotZ(q(3)) * rotX(q(4)) * rotZ(q(5));
  const Vec3 z = Vec3::UnitZ();
  const Vec3 p = shaft * ((q(2) + model.insertion_offset) * z + wrist * (model.wristLength() * z));
  return model.base * RigidPose(shaft * wrist, p);
}

JointVector jointDifference(const JointVector& a, const JointVector& b) {
  JointVector d = a - b;
  for (int j = 0; j < 6; ++j) {
    if (j != kPrismaticJoint) d(j) = wrapAngle(d(j));
  }
  return d;
}

double jointDistance(const KinematicModel& model, const JointVector& a, const JointVector& b) {
  JointVector d = jointDifference(a, b).cwiseAbs();
  d(kPrismaticJoint) *= model.prismatic_scale;
  return d.maxCoeff();
}

IkResult ik(const KinematicModel& model, const RigidPose& target, const IkOptions& options) {
  const RigidPose local = model.base.inverse() * target;
  const Mat3& r = local.rotation();
  const Vec3 wc = local.translation() - model.wristLength() * r.col(2);
  const double reach = wc.norm();
  if (!(reach > 1e-12)) throw Error(ErrorCode::kUnreachable, "wrist center at the RCM");
  const double q3 = reach - model.insertion_offset;
  if (q3 < model.limits.lo[kPrismaticJoint] - 1e-12 || q3 > model.limits.hi[kPrismaticJoint] + 1e-12) {
    throw Error(ErrorCode::kUnreachable, "insertion outside its range");
  }

  // Shaft axis d = Rz(q1) Rx(q2) m with m the mount's z axis. Rz(q1) keeps
  // the z component, so m.y sin q2 + m.z cos q2 = d.z fixes q2 up to the arm
  // branch and q1 then aligns the xy projections.
  const Vec3 d = wc / reach;
  const Vec3 m = model.tool_mount.col(2);
  const double myz = std::hypot(m.y(), m.z());
  const double dxy = std::hypot(d.x(), d.y());
  if (myz < 1e-15) throw Error(ErrorCode::kUnreachable, "tool mount leaves the shaft on the pitch axis");
  const double phase = std::atan2(m.z(), m.y());
  const double s = d.z() / myz;  // sin(q2 + phase)
  if (std::abs(s) > 1.0 + 1e-12) throw Error(ErrorCode::kUnreachable, "shaft direction not reachable");
  const double base_angle = std::asin(std::clamp(s, -1.0, 1.0));

  IkResult result;
  std::vector<JointVector> all;
  for (double q2_plus_phase : {base_angle, kPi - base_angle}) {
    const double q2 = wrapAngle(q2_plus_phase - phase);
    const Vec3 v = rotX(q2) * m;
    if (dxy < 1e-15 && std::hypot(v.x(), v.y()) < 1e-15) continue;
    const double q1 = wrapAngle(std::atan2(d.y(), d.x()) - std::atan2(v.y(), v.x()));

    const Mat3 shaft = shaftRotation(model, q1, q2);
    const Mat3 w = shaft.transpose() * r;  // Rz(q4) Rx(q5) Rz(q6)
    const double s5 = std::hypot(w(2, 0), w(2, 1));
    const double q5_abs = std::atan2(s5, w(2, 2));
    if (std::sin(q5_abs) < 1e-9) {
      result.singular_wrist = true;
      const double q4 = wrapAngle(options.singular_q4);
      double q6;
      double q5;
      if (w(2, 2) > 0.0) {
        q5 = 0.0;
        q6 = wrapAngle(std::atan2(w(1, 0), w(0, 0)) - q4);
      } else {
        q5 = kPi;
        q6 = wrapAngle(q4 - std::atan2(w(1, 0), w(0, 0)));
      }
      JointVector q;
      q << q1, q2, q3, q4, q5, q6;
      all.push_back(q);
      continue;
    }
    for (double sign : {1.0, -1.0}) {
      const double sb = sign * s5;
      JointVector q;
      q << q1, q2, q3, std::atan2(w(0, 2) / sb, -w(1, 2) / sb), wrapAngle(sign * q5_abs),
          std::atan2(w(2, 0) / sb, w(2, 1) / sb);
      q(3) = wrapAngle(q(3));
      q(5) = wrapAngle(q(5));
      all.push_back(q);
    }
  }

  for (const JointVector& q : all) {
    if (options.include_out_of_limits || model.limits.contains(q)) result.solutions.push_back(q);
  }
  std::sort(result.solutions.begin(), result.solutions.end(),
            [](const JointVector& a, const JointVector& b) {
              return std::lexicographical_compare(a.data(), a.data() + 6, b.data(), b.data() + 6);
            });
  return result;
}

std::vector<JointVector> constrainedIk(const KinematicModel& model, const RigidPose& target,
                                       const JointVector& q_msr, double bound) {
  IkOptions options;
  options.singular_q4 = q_msr(3);
  std::vector<JointVector> out;
  for (const JointVector& q : ik(model, target, options).solutions) {
    if (jointDistance(model, q, q_msr) <= bound + 1e-9) out.push_back(q);
  }
  return out;
}

double verifyUnique(const KinematicModel& model, const JointVector& q_msr, double bound,
                    int trial_count, std::uint64_t rng_seed) {
  if (trial_count < 1) throw Error(ErrorCode::kInvalidArgument, "trial_count must be >= 1");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int unique = 0;
  for (int t = 0; t < trial_count; ++t) {
    JointVector dq;
    for (int j = 0; j < 6; ++j) dq(j) = bound * unit(rng);
    dq(kPrismaticJoint) /= model.prismatic_scale;
    const JointVector q = q_msr + dq;
    try {
      if (constrainedIk(model, fk(model, q), q_msr, bound).size() == 1) ++unique;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnreachable) throw;
    }
  }
  return static_cast<double>(unique) / trial_count;
}

}  // namespace suturekit

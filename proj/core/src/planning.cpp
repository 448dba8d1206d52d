// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/planning.hpp"

#include <algorithm>
#include <cmath>

#include "suturekit/errors.hpp"

namespace suturekit {

Vec3 SutureCircle::point(double psi) const {
  return center + radius * (std::cos(psi) * e1 + std::sin(psi) * e2);
}

Vec3 SutureCircle::tangent(double psi) const { return -std::sin(psi) * e1 + std::cos(psi) * e2; }

SutureCircle sutureCircle(const SuturePorts& ports, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius must be positive");
  const Vec3 chord = ports.exit - ports.entry;
  const double length = chord.norm();
  if (!(length > 1e-6)) throw Error(ErrorCode::kInvalidArgument, "entry and exit ports coincide");
  if (!(std::abs(ports.tissue_normal.norm() - 1.0) <= 1e-9)) {
    throw Error(ErrorCode::kInvalidArgument, "tissue normal must be a unit vector");
  }
  if (length > 2.0 * radius + 1e-9) {
    throw Error(ErrorCode::kChordTooLong, "port distance exceeds the needle diameter");
  }
  SutureCircle c;
  c.radius = radius;
  c.e1 = chord / length;
  const Vec3 inplane = ports.tissue_normal - ports.tissue_normal.dot(c.e1) * c.e1;
  if (!(inplane.norm() > 1e-9)) {
    throw Error(ErrorCode::kDegenerateNormal, "tissue normal is parallel to the chord");
  }
  c.e2 = inplane.normalized();
  const double half = 0.5 * length;
  const double h = std::sqrt(std::max(0.0, radius * radius - half * half));
  c.center = 0.5 * (ports.entry + ports.exit) - h * c.e2;
  c.psi_entry = std::atan2(h, -half);
  c.psi_exit = std::atan2(h, half) + 2.0 * kPi;
  return c;
}

RigidPose needlePoseOnCircle(const SutureCircle& circle, const NeedleShape& shape, double psi) {
  // The needle travels tip-first, i.e. clockwise about its own z, while psi
  // increases counter-clockwise about e1 x e2; so z = -(e1 x e2) and the tip
  // at local angle -arc/2 lands on psi.
  const double x_angle = psi - 0.5 * shape.arc_angle;
  Mat3 r;
  r.col(0) = std::cos(x_angle) * circle.e1 + std::sin(x_angle) * circle.e2;
  r.col(2) = -circle.e1.cross(circle.e2);
  r.col(1) = r.col(2).cross(r.col(0));
  return RigidPose(r, circle.center);
}

CircularPath circularSegment(const SutureCircle& circle, const NeedleShape& shape, double psi_begin,
                             double psi_end, int waypoint_count, const RigidPose& grasp_offset) {
  shape.validate();
  if (waypoint_count < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 waypoints");
  if (std::abs(shape.radius - circle.radius) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "needle radius differs from the circle radius");
  }
  CircularPath path;
  path.circle = circle;
  for (int i = 0; i < waypoint_count; ++i) {
    const double psi =
        i == waypoint_count - 1 ? psi_end : psi_begin + (psi_end - psi_begin) * i / (waypoint_count - 1);
    const RigidPose needle = needlePoseOnCircle(circle, shape, psi);
    path.needle.push_back({needle, psi});
    path.tool.push_back({needle * grasp_offset, psi});
  }
  return path;
}

CircularPath circularTrajectory(const SuturePorts& ports, const NeedleShape& shape, int waypoint_count,
                                const RigidPose& grasp_offset) {
  const SutureCircle circle = sutureCircle(ports, shape.radius);
  return circularSegment(circle, shape, circle.psi_entry, circle.psi_exit, waypoint_count, grasp_offset);
}

std::vector<Waypoint> linearTrajectory(const RigidPose& start, const RigidPose& goal, double max_step_pos,
                                       double max_step_rot) {
  if (!(max_step_pos > 0.0) || !(max_step_rot > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step limits must be positive");
  }
  const double dist = (goal.translation() - start.translation()).norm();
  const double angle = rotationDistance(start.rotation(), goal.rotation());
  const int intervals = static_cast<int>(std::ceil(std::max(dist / max_step_pos, angle / max_step_rot)));
  std::vector<Waypoint> out;
  out.push_back({start, 0.0});
  if (intervals == 0) return out;
  const Eigen::Quaterniond q0 = start.quaternion();
  const Eigen::Quaterniond q1 = goal.quaternion();
  for (int i = 1; i < intervals; ++i) {
    const double f = static_cast<double>(i) / intervals;
    const Vec3 p = (1.0 - f) * start.translation() + f * goal.translation();
    out.push_back({RigidPose::fromQuaternion(q0.slerp(f, q1), p), f});
  }
  out.push_back({goal, 1.0});
  return out;
}

namespace {

int arcCount(double sweep, double step) {
  return std::max(2, static_cast<int>(std::ceil(std::abs(sweep) / step)) + 1);
}

std::vector<Waypoint> needleFromTool(const std::vector<Waypoint>& tool, const RigidPose& grasp_offset) {
  const RigidPose inv = grasp_offset.inverse();
  std::vector<Waypoint> out;
  for (const Waypoint& w : tool) out.push_back({w.pose * inv, w.param});
  return out;
}

}  // namespace

SuturePlan planSuturePass(const RigidPose& tool_pose, const SuturePorts& ports, const NeedleShape& shape,
                          const RigidPose& grasp_offset, const PlanConfig& config) {
  if (!(config.arc_step > 0.0) || !(config.retreat_height >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid plan configuration");
  }
  SuturePlan plan;
  plan.circle = sutureCircle(ports, shape.radius);
  const SutureCircle& c = plan.circle;

  const CircularPath insertion =
      circularSegment(c, shape, c.psi_entry, SutureCircle::kPsiDeepest,
                      arcCount(SutureCircle::kPsiDeepest - c.psi_entry, config.arc_step), grasp_offset);
  const CircularPath extraction =
      circularSegment(c, shape, SutureCircle::kPsiDeepest, c.psi_exit,
                      arcCount(c.psi_exit - SutureCircle::kPsiDeepest, config.arc_step), grasp_offset);

  TrajectorySegment approach{"approach", {}, {}, false};
  approach.tool = linearTrajectory(tool_pose, insertion.tool.front().pose, config.max_step_pos,
                                   config.max_step_rot);
  approach.needle = needleFromTool(approach.tool, grasp_offset);
  approach.needle.back().pose = insertion.needle.front().pose;

  const RigidPose last = extraction.tool.back().pose;
  const RigidPose lifted(last.rotation(), last.translation() + config.retreat_height * ports.tissue_normal);
  TrajectorySegment retreat{"retreat", {}, {}, false};
  retreat.tool = linearTrajectory(last, lifted, config.max_step_pos, config.max_step_rot);
  retreat.needle = needleFromTool(retreat.tool, grasp_offset);
  retreat.needle.front().pose = extraction.needle.back().pose;

  plan.segments.push_back(std::move(approach));
  plan.segments.push_back({"insertion", insertion.tool, insertion.needle, true});
  plan.segments.push_back({"extraction", extraction.tool, extraction.needle, true});
  plan.segments.push_back(std::move(retreat));
  return plan;
}

}  // namespace suturekit

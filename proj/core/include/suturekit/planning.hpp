// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "suturekit/geometry.hpp"
#include "suturekit/needle.hpp"

namespace suturekit {

struct SuturePorts {
  Vec3 entry = Vec3::Zero();
  Vec3 exit = Vec3::Zero();
  Vec3 tissue_normal = Vec3::UnitZ();  ///< points out of the tissue
};

/// Circle through both ports in the plane spanned by the chord and the tissue
/// normal, centered below the surface. Points are
/// center + radius (cos psi e1 + sin psi e2), with e1 the chord direction
/// (entry to exit) and e2 the normal component orthogonal to it. The
/// under-tissue arc runs from psi_entry through 3pi/2 to psi_exit, increasing.
struct SutureCircle {
  Vec3 center;
  double radius;
  Vec3 e1, e2;
  double psi_entry;
  double psi_exit;  ///< > psi_entry
  static constexpr double kPsiDeepest = 1.5 * kPi;

  Vec3 point(double psi) const;
  /// Unit direction of increasing psi.
  Vec3 tangent(double psi) const;
  double sweep() const { return psi_exit - psi_entry; }
};

/// Throws kInvalidArgument (coincident ports or non-unit normal),
/// kChordTooLong (chord > 2r + 1e-9) or kDegenerateNormal (normal parallel to
/// the chord).
SutureCircle sutureCircle(const SuturePorts& ports, double radius);

struct Waypoint {
  RigidPose pose;
  double param = 0.0;  ///< psi on circular segments, path fraction on linear ones
};

/// Needle pose with the tip at circle angle psi, the tip tangent along the
/// direction of increasing psi and the needle arc on the circle.
RigidPose needlePoseOnCircle(const SutureCircle& circle, const NeedleShape& shape, double psi);

struct CircularPath {
  SutureCircle circle;
  std::vector<Waypoint> needle;
  std::vector<Waypoint> tool;  ///< needle * grasp_offset
};

/// Full entry-to-exit sweep with `waypoint_count` (>= 2) evenly spaced
/// waypoints.
CircularPath circularTrajectory(const SuturePorts& ports, const NeedleShape& shape, int waypoint_count,
                                const RigidPose& grasp_offset);

/// Waypoints from psi_begin to psi_end inclusive.
CircularPath circularSegment(const SutureCircle& circle, const NeedleShape& shape, double psi_begin,
                             double psi_end, int waypoint_count, const RigidPose& grasp_offset);

/// Straight-line positions and shortest-path slerp orientations.
/// count = ceil(max(dist / max_step_pos, angle / max_step_rot)) + 1; both
/// endpoints are returned exactly. Throws kInvalidArgument for non-positive
/// step limits.
std::vector<Waypoint> linearTrajectory(const RigidPose& start, const RigidPose& goal, double max_step_pos,
                                       double max_step_rot);

struct PlanConfig {
  double max_step_pos = 0.002;          ///< m, linear segments
  double max_step_rot = 5.0 * kDegToRad;
  double arc_step = 2.0 * kDegToRad;    ///< max psi increment on circular segments
  double retreat_height = 0.02;         ///< m along the tissue normal
};

struct TrajectorySegment {
  std::string label;  ///< approach, insertion, extraction, retreat
  std::vector<Waypoint> tool;
  std::vector<Waypoint> needle;
  bool circular = false;
};

struct SuturePlan {
  SutureCircle circle;
  std::vector<TrajectorySegment> segments;
};

/// approach (linear, from the current tool pose to the insertion start),
/// insertion (entry to deepest point), extraction (deepest point to exit),
/// retreat (linear lift along the tissue normal). Segments share their
/// junction poses exactly.
SuturePlan planSuturePass(const RigidPose& tool_pose, const SuturePorts& ports, const NeedleShape& shape,
                          const RigidPose& grasp_offset, const PlanConfig& config = {});

}  // namespace suturekit

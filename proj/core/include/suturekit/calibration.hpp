// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "suturekit/geometry.hpp"
#include "suturekit/kinematics.hpp"

namespace suturekit {

/// Feature points rigidly attached to the jaw, in the jaw (tool-tip) frame.
class FeatureModel {
 public:
  /// Throws kInvalidArgument for fewer than 3 points or colinear points.
  explicit FeatureModel(std::vector<Vec3> body_points);

  /// Non-planar tetrad spanning about 9 mm, set back from the tip.
  static FeatureModel defaultJaw();

  const std::vector<Vec3>& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }

 private:
  std::vector<Vec3> points_;
};

/// Projections of the jaw features with isotropic Gaussian pixel noise.
/// Throws kFeatureBehindCamera.
std::vector<Vec2> detectFeatures(const PinholeCamera& camera, const RigidPose& jaw_pose,
                                 const FeatureModel& features, double noise_px, std::mt19937_64& rng);

struct PoseFit {
  RigidPose pose;
  double residual_sq = 0.0;  ///< summed squared pixel error
  int iterations = 0;        ///< updates applied
};

/// Gauss-Newton over SE(3) (right-multiplied rotation increment plus a world
/// translation increment). Stops when the step norm drops below 1e-10 or after
/// 100 iterations. Throws kFeatureBehindCamera when the initial guess puts a
/// feature at non-positive depth, kGaussNewtonDiverged when the residual
/// grows 10 iterations in a row, kInvalidArgument on a size mismatch.
PoseFit poseFromPixels(const PinholeCamera& camera, const FeatureModel& features,
                       const std::vector<Vec2>& pixels, const RigidPose& initial);

/// dq = constrainedIk(poseFromPixels(..., fk(q_msr)), q_msr, bound) - q_msr.
/// Throws kNoSolution or kAmbiguousSolution when the constrained set does not
/// hold exactly one solution.
JointVector calibrateDirect(const KinematicModel& model, const PinholeCamera& camera,
                            const FeatureModel& features, const JointVector& q_msr,
                            const std::vector<Vec2>& pixels, double bound);

struct CalibSample {
  JointVector q_msr;
  std::vector<Vec2> pixels;
  JointVector delta_q;
};

struct DatasetConfig {
  int count = 10000;
  /// Revolute label range; the prismatic range is this divided by the
  /// model's prismatic scale.
  double delta_range = 5.0 * kDegToRad;
  double noise_px = 0.0;
  /// q_msr is drawn uniformly from center +/- half_width per joint.
  JointVector region_center = (JointVector() << 0.2, -0.3, 0.12, 0.4, 1.2, -0.3).finished();
  JointVector region_half_width =
      (JointVector() << 5.0 * kDegToRad, 5.0 * kDegToRad, 0.005, 5.0 * kDegToRad, 5.0 * kDegToRad,
       5.0 * kDegToRad)
          .finished();
  /// Constrained-IK bound the region must be unique under.
  double unique_bound = 10.0 * kDegToRad;
  int region_checks = 64;
  int region_trials = 64;
};

/// Camera that frames the jaw at the center of the q_msr region from
/// `distance` meters.
PinholeCamera defaultCalibrationCamera(const KinematicModel& model, const DatasetConfig& config,
                                       double distance = 0.2);

/// Verifies the q_msr region (its corners plus random interior points must be
/// unique with fraction 1.0) and draws `count` samples, each from its own
/// stream derived from rng_seed and the sample index. Throws kRegionNotUnique
/// or kInvalidArgument when a feature leaves the image.
std::vector<CalibSample> generateDataset(const KinematicModel& model, const PinholeCamera& camera,
                                         const FeatureModel& features, const DatasetConfig& config,
                                         std::uint64_t rng_seed);

struct JointErrorRow {
  double mean = 0.0;  ///< degrees, or mm for the prismatic joint
  double std = 0.0;
};

/// Per-joint mean and population std of |predicted - label|, in degrees (mm
/// for the prismatic joint).
std::array<JointErrorRow, 6> evaluateCalibration(
    const std::function<JointVector(const CalibSample&)>& predictor,
    const std::vector<CalibSample>& test_set);

/// Joint vector in display units: degrees, prismatic in mm.
JointVector toDisplayUnits(const JointVector& q);
JointVector fromDisplayUnits(const JointVector& q);

}  // namespace suturekit

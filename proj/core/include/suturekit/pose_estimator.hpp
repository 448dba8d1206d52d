// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "suturekit/errors.hpp"
#include "suturekit/needle.hpp"
#include "suturekit/nearest.hpp"

namespace suturekit {

struct EstimatorConfig {
  int max_steps = 1500;
  int axis_sample_count = 200;
  int mask_pixel_cap = 2000;

  double fd_step_px = 0.5;
  double fd_step_angle = 1e-3;

  // Adam learning rates per coordinate class, decayed geometrically to
  // lr * lr_final_ratio at max_steps.
  double lr_px = 0.3;
  double lr_angle = 3e-3;
  double lr_final_ratio = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-12;

  int seed_count = 4;
  /// Stop when the best objective improved by less than this over `patience`
  /// steps (squared pixels).
  double convergence_tol = 1e-6;
  int patience = 50;

  /// Mid-chord distance range used to seed theta1, meters.
  double seed_depth_min = 0.08;
  double seed_depth_max = 0.2;
  int seed_scan_theta1 = 24;
  int seed_scan_theta2 = 16;
  int seed_scan_mask_cap = 400;

  /// Charged per mask pixel when a view has no reprojected points.
  double empty_view_penalty = 1e4;
  /// estimate() fails with kNoConvergence when the best objective per used
  /// mask pixel exceeds this (squared pixels).
  double reject_mean_sq_px = 4.0;

  void validate() const;
};

struct ObjectiveReport {
  double value = 0.0;
  std::array<double, 2> per_view_value{0.0, 0.0};
  std::array<int, 2> mask_pixels_used{0, 0};
};

/// Sum over `pixels` of the squared distance to the nearest of `points`.
/// Throws kInvalidArgument when `points` is empty and `pixels` is not.
double offsetError(std::span<const Vec2> pixels, std::span<const Vec2> points);

/// Deterministic stride subsampling down to at most `cap` pixels.
std::vector<Vec2> subsampleMask(const BinaryMask& mask, int cap);

/// Reprojection-offset objective bound to one pair of masks. Holds the
/// subsampled mask pixels so repeated evaluations only pay for reprojection and
/// nearest-neighbor search.
class ReprojectionObjective {
 public:
  /// Throws kEmptyMasks when both masks are empty.
  ReprojectionObjective(const StereoMasks& masks, const NeedleShape& shape, const StereoRig& rig,
                        const EstimatorConfig& config, int mask_pixel_cap);

  /// Throws kDegenerateRays / kThetaOutOfRange from the parameterization.
  ObjectiveReport evaluate(const NeedleParams& x) const;
  ObjectiveReport evaluate(const RigidPose& needle_pose) const;

  /// Central finite differences with the configured step sizes.
  NeedleParams::Vector gradient(const NeedleParams& x) const;

  /// True when x maps to a valid pose (rays not parallel, theta1 in range).
  bool feasible(const NeedleParams& x) const;

  int usedPixels(int view) const { return static_cast<int>(pixels_[view].size()); }

  const NeedleShape& shape() const { return shape_; }
  const StereoRig& rig() const { return rig_; }
  const EstimatorConfig& config() const { return config_; }

 private:
  std::array<std::vector<Vec2>, 2> pixels_;
  std::vector<Vec3> axis_local_;
  NeedleShape shape_;
  StereoRig rig_;
  EstimatorConfig config_;
};

/// J = sum over views and used mask pixels of the squared distance to the
/// nearest reprojected axis point.
ObjectiveReport objective(const NeedleParams& x, const StereoMasks& masks, const NeedleShape& shape,
                          const StereoRig& rig, const EstimatorConfig& config);

NeedleParams::Vector gradient(const NeedleParams& x, const StereoMasks& masks,
                              const NeedleShape& shape, const StereoRig& rig,
                              const EstimatorConfig& config);

struct Keypoints {
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
};

struct RefineResult {
  NeedleParams params;
  ObjectiveReport report;
  double initial_value = 0.0;
  int steps_used = 0;
};

/// One Adam run from `start`; returns the best iterate seen.
RefineResult refine(const ReprojectionObjective& objective, const NeedleParams& start);

struct EstimateResult {
  RigidPose pose;
  NeedleParams params;
  ObjectiveReport report;
  int steps_used = 0;
  int best_seed = 0;
  std::vector<double> seed_values;
};

/// Raised when the best objective is above the reject threshold; carries the
/// full result for diagnostics.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, EstimateResult result)
      : Error(ErrorCode::kNoConvergence, message), result_(std::move(result)) {}
  const EstimateResult& result() const { return result_; }

 private:
  EstimateResult result_;
};

/// Multi-start estimate. Keypoints start at the anchor-view hints; theta1 and
/// theta2 seeds come from a coarse scan (one seed per theta2 sector, theta1
/// restricted to mid-chord distances in the configured range when possible).
EstimateResult estimate(const StereoMasks& masks, const std::array<Keypoints, 2>& hints,
                        const NeedleShape& shape, const StereoRig& rig,
                        const EstimatorConfig& config = {});

/// Distance between needle centers, meters.
double positionError(const RigidPose& estimate, const RigidPose& truth);
/// Geodesic angle between needle frames, radians.
double angularError(const RigidPose& estimate, const RigidPose& truth);

}  // namespace suturekit

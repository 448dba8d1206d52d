// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <random>

#include "suturekit/needle.hpp"
#include "suturekit/pose_estimator.hpp"

namespace suturekit {

/// Ground truth for one stereo needle observation.
struct NeedleScene {
  StereoRig rig;
  NeedleShape shape;
  RigidPose needle_pose;
  std::optional<ArcInterval> occlusion;
};

struct StereoObservation {
  StereoMasks masks{BinaryMask(1, 1), BinaryMask(1, 1)};
  std::array<Keypoints, 2> hints;
};

/// Source of fine masks and start/end keypoints for both views. Learned
/// detectors plug in here; the library ships the synthetic one below.
class PerceptionProvider {
 public:
  virtual ~PerceptionProvider() = default;
  virtual StereoObservation observe(const NeedleScene& scene, std::mt19937_64& rng) const = 0;
};

/// Rasterized masks plus projected keypoints with optional Gaussian noise.
class SyntheticPerception final : public PerceptionProvider {
 public:
  explicit SyntheticPerception(double line_width = 2.0, double keypoint_noise_px = 0.0)
      : line_width_(line_width), keypoint_noise_px_(keypoint_noise_px) {}

  StereoObservation observe(const NeedleScene& scene, std::mt19937_64& rng) const override;

 private:
  double line_width_;
  double keypoint_noise_px_;
};

/// 640x480, f = 1000 px, parallel rig with a 20 mm baseline along +x.
StereoRig defaultStereoRig();

struct SceneSampling {
  double distance_min = 0.08;  ///< needle center to left camera, meters
  double distance_max = 0.2;
  /// Largest angle between the arc-plane normal and the line of sight.
  double max_tilt = 60.0 * kDegToRad;
  /// Whole arc must project this far inside both images, pixels.
  double image_margin = 5.0;
  int max_attempts = 10000;
};

/// Random needle pose in view of both cameras. Throws kInvalidArgument when no
/// valid pose is found within `max_attempts`.
NeedleScene randomScene(const StereoRig& rig, const NeedleShape& shape, const SceneSampling& sampling,
                        std::mt19937_64& rng);

/// Contiguous occlusion of the given arc fraction, centered at a random
/// position that keeps both keypoints visible.
ArcInterval randomOcclusion(double fraction, std::mt19937_64& rng);

}  // namespace suturekit

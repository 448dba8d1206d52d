// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/perception.hpp"

#include <cmath>

#include "suturekit/errors.hpp"

namespace suturekit {

StereoObservation SyntheticPerception::observe(const NeedleScene& scene, std::mt19937_64& rng) const {
  StereoObservation obs;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int v = 0; v < 2; ++v) {
    const PinholeCamera& cam = scene.rig.view(v);
    obs.masks[v] = rasterize(scene.needle_pose, scene.shape, cam, line_width_, scene.occlusion);
    Keypoints& kp = obs.hints[v];
    kp.start = cam.project(arcPoint(scene.needle_pose, scene.shape, 0.0));
    kp.end = cam.project(arcPoint(scene.needle_pose, scene.shape, scene.shape.arc_angle));
    if (keypoint_noise_px_ > 0.0) {
      kp.start += keypoint_noise_px_ * Vec2(noise(rng), noise(rng));
      kp.end += keypoint_noise_px_ * Vec2(noise(rng), noise(rng));
    }
  }
  return obs;
}

StereoRig defaultStereoRig() {
  const PinholeCamera left(1000.0, 1000.0, 320.0, 240.0, 640, 480);
  const PinholeCamera right(1000.0, 1000.0, 320.0, 240.0, 640, 480,
                            RigidPose::fromTranslation(Vec3(0.02, 0.0, 0.0)));
  return StereoRig(left, right);
}

namespace {

Vec3 anyPerpendicular(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(helper).normalized();
}

}  // namespace

NeedleScene randomScene(const StereoRig& rig, const NeedleShape& shape, const SceneSampling& sampling,
                        std::mt19937_64& rng) {
  shape.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const PinholeCamera& left = rig.left;
  constexpr int kCheckSamples = 48;

  for (int attempt = 0; attempt < sampling.max_attempts; ++attempt) {
    const double distance =
        sampling.distance_min + (sampling.distance_max - sampling.distance_min) * unit(rng);
    const Vec2 pixel(left.width() * (0.15 + 0.7 * unit(rng)), left.height() * (0.15 + 0.7 * unit(rng)));
    const Vec3 ray = left.backprojectRay(pixel);
    const Vec3 center = left.center() + distance * ray;

    // Normal inside a cone around the direction back to the camera.
    const double cos_tilt = 1.0 - unit(rng) * (1.0 - std::cos(sampling.max_tilt));
    const double tilt = std::acos(cos_tilt);
    const double azimuth = 2.0 * kPi * unit(rng);
    const Vec3 axis0 = -ray;
    const Vec3 perp = anyPerpendicular(axis0);
    const Vec3 normal = rotAxisAngle(axis0, azimuth) * rotAxisAngle(perp, tilt) * axis0;
    const Vec3 x0 = anyPerpendicular(normal);
    const Vec3 x_axis = rotAxisAngle(normal, 2.0 * kPi * unit(rng)) * x0;
    Mat3 r;
    r.col(0) = x_axis.normalized();
    r.col(2) = normal.normalized();
    r.col(1) = r.col(2).cross(r.col(0));
    const RigidPose pose(nearestRotation(r), center);

    bool ok = true;
    for (int i = 0; i <= kCheckSamples && ok; ++i) {
      const Vec3 p = arcPoint(pose, shape, shape.arc_angle * i / kCheckSamples);
      for (int v = 0; v < 2 && ok; ++v) {
        const PinholeCamera& cam = rig.view(v);
        const Vec3 pc = cam.toCamera(p);
        ok = pc.z() > 1e-3 && cam.inImage(cam.projectCameraPoint(pc), sampling.image_margin);
      }
    }
    if (ok) return NeedleScene{rig, shape, pose, std::nullopt};
  }
  throw Error(ErrorCode::kInvalidArgument, "could not place a needle in view of both cameras");
}

ArcInterval randomOcclusion(double fraction, std::mt19937_64& rng) {
  if (!(fraction > 0.0) || !(fraction <= 0.8)) {
    throw Error(ErrorCode::kInvalidArgument, "occlusion fraction must lie in (0, 0.8]");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Keep 10% of the arc visible at each end so keypoints stay observable.
  const double lo = 0.1 + (0.8 - fraction) * unit(rng);
  return {lo, lo + fraction};
}

}  // namespace suturekit

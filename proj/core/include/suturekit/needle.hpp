// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "suturekit/geometry.hpp"

namespace suturekit {

/// Circular-arc needle. The needle frame has its origin at the arc-circle
/// center, z along the arc-plane normal and x toward the arc midpoint. Arc
/// parameter s runs over [0, arc_angle]; s = 0 is the start point (the tip),
/// s = arc_angle the end point.
struct NeedleShape {
  double radius = 0.01;
  double arc_angle = kPi;

  /// Throws kInvalidArgument unless radius > 0 and 0 < arc_angle <= 2pi - 1e-6.
  void validate() const;
  double chordLength() const;

  /// Point on the arc in the needle frame.
  Vec3 localPoint(double s) const;
  /// Unit direction the tip travels when the needle is driven tip-first
  /// (needle frame).
  Vec3 localTipTangent() const;
};

Vec3 arcPoint(const RigidPose& needle_pose, const NeedleShape& shape, double s);
inline Vec3 tipPoint(const RigidPose& needle_pose, const NeedleShape& shape) {
  return arcPoint(needle_pose, shape, 0.0);
}

/// The disentangled 6-DOF parameterization: two angles plus the start/end
/// keypoint pixels in the anchor (left) camera.
///
/// theta1 is the interior angle at the start point of the triangle formed by
/// the camera center and the two chord endpoints; theta2 is the rotation of
/// the arc plane about the chord, measured from the plane spanned by the two
/// keypoint rays.
struct NeedleParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Vec2 kp_st = Vec2::Zero();
  Vec2 kp_ed = Vec2::Zero();

  using Vector = Eigen::Matrix<double, 6, 1>;
  /// Order: theta1, theta2, kp_st.x, kp_st.y, kp_ed.x, kp_ed.y.
  Vector toVector() const;
  static NeedleParams fromVector(const Vector& v);
};

/// Geometry of the plane spanned by two keypoint rays.
struct RayFrame {
  Vec3 origin;      ///< camera center
  Vec3 d_st, d_ed;  ///< unit rays
  double alpha;     ///< angle between the rays
};

/// Throws kDegenerateRays when the rays are (nearly) parallel.
RayFrame keypointRays(const PinholeCamera& anchor, const Vec2& kp_st, const Vec2& kp_ed);

/// Distances along the start/end rays to the chord endpoints.
std::array<double, 2> endpointDepths(double alpha, double theta1, double chord_length);

/// Throws kDegenerateRays or kThetaOutOfRange.
RigidPose paramsToPose(const NeedleParams& x, const NeedleShape& shape, const PinholeCamera& anchor);

/// Throws kNonPositiveDepth when an endpoint is not in front of the anchor.
NeedleParams poseToParams(const RigidPose& needle_pose, const NeedleShape& shape,
                          const PinholeCamera& anchor);

/// Occluded portion of the arc as fractions of arc length, closed interval.
struct ArcInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double fraction) const { return fraction >= lo && fraction <= hi; }
};

/// `count` points uniformly spaced in arc parameter, minus those whose arc
/// fraction falls inside `occlusion`. Throws kInvalidArgument when count < 2.
std::vector<Vec3> sampleAxisPoints(const RigidPose& needle_pose, const NeedleShape& shape, int count,
                                   const std::optional<ArcInterval>& occlusion = std::nullopt);

/// Projects sampled points into one camera, dropping points behind it.
std::vector<Vec2> projectVisible(const PinholeCamera& camera, const std::vector<Vec3>& points);

using StereoPoints = std::array<std::vector<Vec2>, 2>;

StereoPoints reproject(const RigidPose& needle_pose, const NeedleShape& shape, const StereoRig& rig,
                       int count);

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

class BinaryMask {
 public:
  BinaryMask(int width, int height);
  /// Throws kInvalidArgument on out-of-bounds or duplicate pixels.
  BinaryMask(int width, int height, std::vector<Pixel> foreground);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<Pixel>& foreground() const { return foreground_; }
  std::size_t size() const { return foreground_.size(); }
  bool empty() const { return foreground_.empty(); }

  /// Row-major 8-bit raster, 255 for foreground.
  std::vector<unsigned char> raster() const;

 private:
  int width_;
  int height_;
  std::vector<Pixel> foreground_;
};

using StereoMasks = std::array<BinaryMask, 2>;

/// All integer pixels within line_width/2 of the projected arc polyline,
/// clipped to the image. The arc is sampled at 4 samples per pixel of
/// projected length; occluded arc portions produce no pixels.
BinaryMask rasterize(const RigidPose& needle_pose, const NeedleShape& shape,
                     const PinholeCamera& camera, double line_width,
                     const std::optional<ArcInterval>& occlusion = std::nullopt);

/// Binary PGM (P5, maxval 255).
void writePgm(const BinaryMask& mask, const std::string& path);

}  // namespace suturekit

// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <numbers>

namespace suturekit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Wraps an angle into (-pi, pi].
double wrapAngle(double angle);

Mat3 rotX(double angle);
Mat3 rotY(double angle);
Mat3 rotZ(double angle);
Mat3 rotAxisAngle(const Vec3& axis, double angle);

/// Maximum deviation of R^T R from the identity.
double orthonormalityError(const Mat3& r);

/// Projects a nearly-orthonormal matrix onto SO(3) (closest rotation in
/// Frobenius norm).
Mat3 nearestRotation(const Mat3& m);

/// Rigid transform x -> R x + t. Lengths in meters.
///
/// The rotation is kept orthonormal with det = +1 (checked to 1e-9 when built
/// from user data). Composition renormalizes nothing; drift over long chains
/// stays far below the check tolerance.
class RigidPose {
 public:
  RigidPose() = default;

  /// Throws kInvalidArgument when `rotation` is not a proper rotation within
  /// 1e-9.
  RigidPose(const Mat3& rotation, const Vec3& translation);

  static RigidPose identity() { return {}; }
  static RigidPose fromTranslation(const Vec3& t);
  static RigidPose fromRotation(const Mat3& r);
  static RigidPose fromQuaternion(const Eigen::Quaterniond& q, const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Eigen::Quaterniond quaternion() const;

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  Vec3 applyInverse(const Vec3& point) const {
    return rotation_.transpose() * (point - translation_);
  }

  /// this ∘ other (apply `other` first).
  RigidPose operator*(const RigidPose& other) const;
  RigidPose inverse() const;

  Eigen::Matrix4d matrix() const;

 private:
  struct Unchecked {};
  RigidPose(Unchecked, const Mat3& r, const Vec3& t) : rotation_(r), translation_(t) {}

  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

inline RigidPose compose(const RigidPose& a, const RigidPose& b) { return a * b; }
inline RigidPose invert(const RigidPose& a) { return a.inverse(); }

/// Geodesic angle between two rotations, radians in [0, pi].
double rotationDistance(const Mat3& a, const Mat3& b);

/// Camera-style pose at `eye` with z toward `target` and y as close as
/// possible to `down`. Throws kInvalidArgument when eye == target or `down` is
/// parallel to the viewing direction.
RigidPose lookAt(const Vec3& eye, const Vec3& target, const Vec3& down);

/// Ideal pinhole camera; pixel centers sit at integer coordinates.
class PinholeCamera {
 public:
  PinholeCamera(double fx, double fy, double cx, double cy, int width, int height,
                const RigidPose& world_from_camera = RigidPose::identity());

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const RigidPose& pose() const { return world_from_camera_; }
  Vec3 center() const { return world_from_camera_.translation(); }

  Vec3 toCamera(const Vec3& point_world) const { return world_from_camera_.applyInverse(point_world); }

  /// Throws kNonPositiveDepth when the point's camera-frame depth is <= 1e-12.
  /// The returned pixel may lie outside the image.
  Vec2 project(const Vec3& point_world) const;

  /// Projects a camera-frame point, no depth check.
  Vec2 projectCameraPoint(const Vec3& p) const {
    return {cx_ + fx_ * p.x() / p.z(), cy_ + fy_ * p.y() / p.z()};
  }

  /// Unit direction (world frame) of the ray through `pixel`.
  Vec3 backprojectRay(const Vec2& pixel) const;

  bool inImage(const Vec2& pixel, double margin = 0.0) const;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
  RigidPose world_from_camera_;
};

struct StereoRig {
  /// Throws kInvalidArgument when the two camera centers coincide.
  StereoRig(PinholeCamera left_camera, PinholeCamera right_camera);

  const PinholeCamera& view(int index) const { return index == 0 ? left : right; }
  double baseline() const { return (left.center() - right.center()).norm(); }

  PinholeCamera left;
  PinholeCamera right;
};

}  // namespace suturekit

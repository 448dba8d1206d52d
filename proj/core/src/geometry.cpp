// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "suturekit/errors.hpp"

namespace suturekit {

std::string_view errorCodeName(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kDegenerateRays: return "DegenerateRays";
    case ErrorCode::kThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::kEmptyMasks: return "EmptyMasks";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kFeatureBehindCamera: return "FeatureBehindCamera";
    case ErrorCode::kGaussNewtonDiverged: return "GaussNewtonDiverged";
    case ErrorCode::kNoSolution: return "NoSolution";
    case ErrorCode::kAmbiguousSolution: return "AmbiguousSolution";
    case ErrorCode::kRegionNotUnique: return "RegionNotUnique";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kChordTooLong: return "ChordTooLong";
    case ErrorCode::kDegenerateNormal: return "DegenerateNormal";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

double wrapAngle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat3 rotX(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rotY(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rotZ(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 rotAxisAngle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double orthonormalityError(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 nearestRotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = orthonormalityError(rotation);
  const double det = rotation.determinant();
  if (!(ortho <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9) || !translation.allFinite()) {
    std::ostringstream msg;
    msg << "not a proper rigid transform (orthonormality error " << ortho << ", det " << det << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
}

RigidPose RigidPose::fromTranslation(const Vec3& t) {
  return RigidPose(Unchecked{}, Mat3::Identity(), t);
}

RigidPose RigidPose::fromRotation(const Mat3& r) { return RigidPose(r, Vec3::Zero()); }

RigidPose RigidPose::fromQuaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return RigidPose(Unchecked{}, q.normalized().toRotationMatrix(), t);
}

Eigen::Quaterniond RigidPose::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;
  return q;
}

RigidPose RigidPose::operator*(const RigidPose& other) const {
  return RigidPose(Unchecked{}, rotation_ * other.rotation_,
                   rotation_ * other.translation_ + translation_);
}

RigidPose RigidPose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidPose(Unchecked{}, rt, -(rt * translation_));
}

Eigen::Matrix4d RigidPose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

double rotationDistance(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a.transpose() * b;
  // atan2 form stays accurate near 0 and pi, unlike acos of the trace.
  const Vec3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (rel.trace() - 1.0));
}

RigidPose lookAt(const Vec3& eye, const Vec3& target, const Vec3& down) {
  const Vec3 view = target - eye;
  if (!(view.norm() > 1e-12)) throw Error(ErrorCode::kInvalidArgument, "eye coincides with target");
  const Vec3 z = view.normalized();
  const Vec3 y_raw = down - down.dot(z) * z;
  if (!(y_raw.norm() > 1e-9)) throw Error(ErrorCode::kInvalidArgument, "down is parallel to the view");
  Mat3 r;
  r.col(2) = z;
  r.col(1) = y_raw.normalized();
  r.col(0) = r.col(1).cross(z);
  return RigidPose(r, eye);
}

PinholeCamera::PinholeCamera(double fx, double fy, double cx, double cy, int width, int height,
                             const RigidPose& world_from_camera)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height),
      world_from_camera_(world_from_camera) {
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "camera requires fx, fy > 0 and positive image size");
  }
}

Vec2 PinholeCamera::project(const Vec3& point_world) const {
  const Vec3 p = toCamera(point_world);
  if (!(p.z() > 1e-12)) {
    throw Error(ErrorCode::kNonPositiveDepth, "point is not in front of the camera");
  }
  return projectCameraPoint(p);
}

Vec3 PinholeCamera::backprojectRay(const Vec2& pixel) const {
  const Vec3 d((pixel.x() - cx_) / fx_, (pixel.y() - cy_) / fy_, 1.0);
  return world_from_camera_.rotation() * d.normalized();
}

bool PinholeCamera::inImage(const Vec2& pixel, double margin) const {
  return pixel.x() >= margin && pixel.y() >= margin && pixel.x() <= width_ - 1 - margin &&
         pixel.y() <= height_ - 1 - margin;
}

StereoRig::StereoRig(PinholeCamera left_camera, PinholeCamera right_camera)
    : left(std::move(left_camera)), right(std::move(right_camera)) {
  if (!((left.center() - right.center()).norm() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stereo rig needs distinct camera centers");
  }
}

}  // namespace suturekit

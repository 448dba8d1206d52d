// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/calibration.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "suturekit/errors.hpp"
#include "suturekit/random.hpp"

namespace suturekit {

FeatureModel::FeatureModel(std::vector<Vec3> body_points) : points_(std::move(body_points)) {
  if (points_.size() < 3) throw Error(ErrorCode::kInvalidArgument, "need at least 3 feature points");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points_) mean += p;
  mean /= static_cast<double>(points_.size());
  Eigen::MatrixXd centered(points_.size(), 3);
  for (std::size_t i = 0; i < points_.size(); ++i) centered.row(i) = (points_[i] - mean).transpose();
  // Colinear points leave only one non-zero singular value.
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
  if (!(sv(1) > 1e-9)) throw Error(ErrorCode::kInvalidArgument, "feature points are colinear");
}

FeatureModel FeatureModel::defaultJaw() {
  return FeatureModel({Vec3(0.0045, 0.0, -0.002), Vec3(-0.0045, 0.0, -0.002),
                       Vec3(0.0, 0.0045, -0.008), Vec3(0.0, -0.0045, -0.011)});
}

std::vector<Vec2> detectFeatures(const PinholeCamera& camera, const RigidPose& jaw_pose,
                                 const FeatureModel& features, double noise_px, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Vec2> out;
  out.reserve(features.points().size());
  for (const Vec3& p : features.points()) {
    const Vec3 pc = camera.toCamera(jaw_pose.apply(p));
    if (!(pc.z() > 1e-12)) throw Error(ErrorCode::kFeatureBehindCamera, "jaw feature behind camera");
    out.push_back(camera.projectCameraPoint(pc));
  }
  if (noise_px > 0.0) {
    for (Vec2& px : out) px += noise_px * Vec2(noise(rng), noise(rng));
  }
  return out;
}

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 expSo3(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-15) return Mat3::Identity() + skew(w);
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

}  // namespace

PoseFit poseFromPixels(const PinholeCamera& camera, const FeatureModel& features,
                       const std::vector<Vec2>& pixels, const RigidPose& initial) {
  const auto& body = features.points();
  if (pixels.size() != body.size()) {
    throw Error(ErrorCode::kInvalidArgument, "pixel count does not match the feature model");
  }
  const int n = static_cast<int>(body.size());
  const Mat3 rc_t = camera.pose().rotation().transpose();

  Mat3 r = initial.rotation();
  Vec3 t = initial.translation();

  // Residuals and Jacobian wrt [rotation increment (jaw frame), translation].
  Eigen::VectorXd res(2 * n);
  Eigen::MatrixXd jac(2 * n, 6);
  const auto linearize = [&](const Mat3& rot, const Vec3& trans, bool with_jacobian) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 world = rot * body[i] + trans;
      const Vec3 pc = camera.toCamera(world);
      if (!(pc.z() > 1e-12)) return std::numeric_limits<double>::quiet_NaN();
      const Vec2 px = camera.projectCameraPoint(pc);
      res.segment<2>(2 * i) = px - pixels[i];
      sum += res.segment<2>(2 * i).squaredNorm();
      if (with_jacobian) {
        Eigen::Matrix<double, 2, 3> dpix;
        const double iz = 1.0 / pc.z();
        dpix << camera.fx() * iz, 0.0, -camera.fx() * pc.x() * iz * iz, 0.0, camera.fy() * iz,
            -camera.fy() * pc.y() * iz * iz;
        const Eigen::Matrix<double, 2, 3> dworld = dpix * rc_t;
        jac.block<2, 3>(2 * i, 0) = -dworld * rot * skew(body[i]);
        jac.block<2, 3>(2 * i, 3) = dworld;
      }
    }
    return sum;
  };

  double residual = linearize(r, t, true);
  if (std::isnan(residual)) {
    throw Error(ErrorCode::kFeatureBehindCamera, "initial guess puts a feature behind the camera");
  }

  PoseFit fit;
  int growth = 0;
  for (int it = 0; it < 100; ++it) {
    const Eigen::Matrix<double, 6, 1> step =
        (jac.transpose() * jac).ldlt().solve(-(jac.transpose() * res));
    if (!step.allFinite()) throw Error(ErrorCode::kGaussNewtonDiverged, "singular normal equations");
    if (step.norm() < 1e-10) break;
    r = r * expSo3(step.head<3>());
    t += step.tail<3>();
    ++fit.iterations;
    const double next = linearize(r, t, true);
    if (std::isnan(next)) {
      throw Error(ErrorCode::kFeatureBehindCamera, "iterate puts a feature behind the camera");
    }
    growth = next > residual ? growth + 1 : 0;
    residual = next;
    if (growth >= 10) {
      std::ostringstream msg;
      msg << "residual grew for 10 iterations (now " << residual << " px^2)";
      throw Error(ErrorCode::kGaussNewtonDiverged, msg.str());
    }
  }
  fit.pose = RigidPose(nearestRotation(r), t);
  fit.residual_sq = linearize(fit.pose.rotation(), fit.pose.translation(), false);
  return fit;
}

JointVector calibrateDirect(const KinematicModel& model, const PinholeCamera& camera,
                            const FeatureModel& features, const JointVector& q_msr,
                            const std::vector<Vec2>& pixels, double bound) {
  const PoseFit fit = poseFromPixels(camera, features, pixels, fk(model, q_msr));
  const std::vector<JointVector> set = constrainedIk(model, fit.pose, q_msr, bound);
  if (set.empty()) throw Error(ErrorCode::kNoSolution, "no IK solution within the bound");
  if (set.size() > 1) {
    throw Error(ErrorCode::kAmbiguousSolution,
                std::to_string(set.size()) + " IK solutions within the bound");
  }
  return jointDifference(set.front(), q_msr);
}

PinholeCamera defaultCalibrationCamera(const KinematicModel& model, const DatasetConfig& config,
                                       double distance) {
  const RigidPose jaw = fk(model, config.region_center);
  const Mat3& r = jaw.rotation();
  const Vec3 eye = jaw.translation() + distance * (r * Vec3(1.0, 0.5, 0.5)).normalized();
  return PinholeCamera(1000.0, 1000.0, 320.0, 240.0, 640, 480,
                       lookAt(eye, jaw.translation(), r.col(1)));
}

namespace {

JointVector drawInRegion(const DatasetConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  JointVector q;
  for (int j = 0; j < 6; ++j) q(j) = config.region_center(j) + config.region_half_width(j) * unit(rng);
  return q;
}

}  // namespace

std::vector<CalibSample> generateDataset(const KinematicModel& model, const PinholeCamera& camera,
                                         const FeatureModel& features, const DatasetConfig& config,
                                         std::uint64_t rng_seed) {
  if (config.count < 1) throw Error(ErrorCode::kInvalidArgument, "dataset count must be >= 1");

  // Region check: all corners plus random interior points.
  std::vector<JointVector> probes;
  for (int mask = 0; mask < 64; ++mask) {
    JointVector q = config.region_center;
    for (int j = 0; j < 6; ++j) q(j) += ((mask >> j) & 1 ? 1.0 : -1.0) * config.region_half_width(j);
    probes.push_back(q);
  }
  std::mt19937_64 check_rng(deriveSeed(rng_seed, 0xc4ec));
  for (int i = 0; i < config.region_checks; ++i) probes.push_back(drawInRegion(config, check_rng));
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const double fraction =
        verifyUnique(model, probes[i], config.unique_bound, config.region_trials, deriveSeed(rng_seed, i));
    if (fraction < 1.0) {
      std::ostringstream msg;
      msg << "q_msr region is not unique: fraction " << fraction << " at probe " << i;
      throw Error(ErrorCode::kRegionNotUnique, msg.str());
    }
  }

  std::vector<CalibSample> out;
  out.reserve(static_cast<std::size_t>(config.count));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < config.count; ++i) {
    std::mt19937_64 rng(deriveSeed(rng_seed, static_cast<std::uint64_t>(i) + 1000000));
    CalibSample s;
    s.q_msr = drawInRegion(config, rng);
    for (int j = 0; j < 6; ++j) s.delta_q(j) = config.delta_range * unit(rng);
    s.delta_q(kPrismaticJoint) /= model.prismatic_scale;
    s.pixels = detectFeatures(camera, fk(model, s.q_msr + s.delta_q), features, config.noise_px, rng);
    for (const Vec2& px : s.pixels) {
      if (!camera.inImage(px)) {
        throw Error(ErrorCode::kInvalidArgument, "jaw feature leaves the calibration image");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

JointVector toDisplayUnits(const JointVector& q) {
  JointVector out = q * kRadToDeg;
  out(kPrismaticJoint) = q(kPrismaticJoint) * 1000.0;
  return out;
}

JointVector fromDisplayUnits(const JointVector& q) {
  JointVector out = q * kDegToRad;
  out(kPrismaticJoint) = q(kPrismaticJoint) / 1000.0;
  return out;
}

std::array<JointErrorRow, 6> evaluateCalibration(
    const std::function<JointVector(const CalibSample&)>& predictor,
    const std::vector<CalibSample>& test_set) {
  std::array<JointErrorRow, 6> table{};
  if (test_set.empty()) return table;
  JointVector sum = JointVector::Zero(), sum_sq = JointVector::Zero();
  for (const CalibSample& s : test_set) {
    const JointVector err = toDisplayUnits(predictor(s) - s.delta_q).cwiseAbs();
    sum += err;
    sum_sq += err.cwiseProduct(err);
  }
  const double n = static_cast<double>(test_set.size());
  for (int j = 0; j < 6; ++j) {
    table[j].mean = sum(j) / n;
    table[j].std = std::sqrt(std::max(0.0, sum_sq(j) / n - table[j].mean * table[j].mean));
  }
  return table;
}

}  // namespace suturekit

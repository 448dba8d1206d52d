// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "suturekit/errors.hpp"

namespace suturekit {

using nlohmann::json;

namespace {

template <typename T>
T valueOr(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad value for '") + key + "': " + e.what());
  }
}

Vec3 vec3FromJson(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be a 3-element array");
  }
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": " + e.what());
  }
}

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parseNumber(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument, "malformed number '" + text + "'");
  }
  return value;
}

double scaledOr(const json& j, const char* key, double fallback, double to_internal) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return valueOr(j, key, 0.0) * to_internal;
}

}  // namespace

json loadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
}

void writeTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string configHash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fileHeader(const std::string& hash, const std::string& units) {
  return "# suturekit config_hash=" + hash + " units=" + units + "\n";
}

std::string formatNumber(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

RigidPose poseFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "pose must be an object");
  if (j.contains("rotation") || j.contains("translation")) {
    // Matrix form: row-major rotation, translation in meters.
    Mat3 r = Mat3::Identity();
    if (j.contains("rotation")) {
      const json& rj = j.at("rotation");
      if (!rj.is_array() || rj.size() != 9) {
        throw Error(ErrorCode::kInvalidArgument, "rotation must have 9 numbers");
      }
      for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = rj[k].get<double>();
      if (!r.allFinite() || (r.transpose() * r - Mat3::Identity()).norm() > 1e-6 || r.determinant() < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "rotation is not orthonormal");
      }
    }
    const Vec3 t = j.contains("translation") ? vec3FromJson(j.at("translation"), "translation") : Vec3::Zero();
    return RigidPose(nearestRotation(r), t);
  }
  const Vec3 p = j.contains("position_mm") ? vec3FromJson(j.at("position_mm"), "position_mm") : Vec3::Zero();
  const Vec3 rpy = j.contains("rpy_deg") ? vec3FromJson(j.at("rpy_deg"), "rpy_deg") : Vec3::Zero();
  const Mat3 r = rotZ(rpy.z() * kDegToRad) * rotY(rpy.y() * kDegToRad) * rotX(rpy.x() * kDegToRad);
  return RigidPose(nearestRotation(r), p * 1e-3);
}

PinholeCamera cameraFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "camera must be an object");
  const double fx = valueOr(j, "fx", 1000.0);
  const double fy = valueOr(j, "fy", fx);
  const int width = valueOr(j, "width", 640);
  const int height = valueOr(j, "height", 480);
  const double cx = valueOr(j, "cx", 0.5 * width);
  const double cy = valueOr(j, "cy", 0.5 * height);
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "camera focal lengths and size must be positive");
  }
  const RigidPose pose = j.contains("pose") ? poseFromJson(j.at("pose")) : RigidPose::identity();
  return PinholeCamera(fx, fy, cx, cy, width, height, pose);
}

StereoRig rigFromJson(const json& j) {
  if (!j.is_object() || !j.contains("left") || !j.contains("right")) {
    throw Error(ErrorCode::kInvalidArgument, "rig needs 'left' and 'right' cameras");
  }
  return StereoRig(cameraFromJson(j.at("left")), cameraFromJson(j.at("right")));
}

NeedleShape needleShapeFromJson(const json& j) {
  NeedleShape s;
  s.radius = scaledOr(j, "radius_mm", s.radius, 1e-3);
  s.arc_angle = scaledOr(j, "arc_deg", s.arc_angle, kDegToRad);
  s.validate();
  return s;
}

JointVector jointVectorFromJson(const json& j) {
  JointVector display;
  try {
    if (j.is_number()) {
      display.setConstant(j.get<double>());
    } else if (j.is_array() && j.size() == 6) {
      for (int i = 0; i < 6; ++i) display(i) = j[i].get<double>();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "joint vector must be a number or a 6-element array");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("joint vector: ") + e.what());
  }
  return fromDisplayUnits(display);
}

namespace {

JointVector jointVectorOr(const json& j, const char* key, const JointVector& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return jointVectorFromJson(j.at(key));
}

}  // namespace

KinematicModel kinematicModelFromJson(const json& j) {
  KinematicModel m;
  if (j.contains("base")) m.base = poseFromJson(j.at("base"));
  if (j.contains("tool_mount_rpy_deg")) {
    const Vec3 rpy = vec3FromJson(j.at("tool_mount_rpy_deg"), "tool_mount_rpy_deg") * kDegToRad;
    m.tool_mount = nearestRotation(rotZ(rpy.z()) * rotY(rpy.y()) * rotX(rpy.x()));
  }
  m.insertion_offset = scaledOr(j, "insertion_offset_mm", m.insertion_offset, 1e-3);
  m.pitch_to_yaw = scaledOr(j, "pitch_to_yaw_mm", m.pitch_to_yaw, 1e-3);
  m.yaw_to_tip = scaledOr(j, "yaw_to_tip_mm", m.yaw_to_tip, 1e-3);
  if (j.contains("limits")) {
    const json& l = j.at("limits");
    JointVector lo, hi;
    for (int i = 0; i < 6; ++i) {
      lo(i) = m.limits.lo[i];
      hi(i) = m.limits.hi[i];
    }
    lo = jointVectorOr(l, "lo", lo);
    hi = jointVectorOr(l, "hi", hi);
    for (int i = 0; i < 6; ++i) {
      m.limits.lo[i] = lo(i);
      m.limits.hi[i] = hi(i);
    }
  }
  m.prismatic_scale =
      scaledOr(j, "prismatic_scale_deg_per_mm", m.prismatic_scale, kDegToRad * 1e3);
  m.validate();
  return m;
}

EstimatorConfig estimatorConfigFromJson(const json& j) {
  EstimatorConfig c;
  c.max_steps = valueOr(j, "max_steps", c.max_steps);
  c.axis_sample_count = valueOr(j, "axis_sample_count", c.axis_sample_count);
  c.mask_pixel_cap = valueOr(j, "mask_pixel_cap", c.mask_pixel_cap);
  c.fd_step_px = valueOr(j, "fd_step_px", c.fd_step_px);
  c.fd_step_angle = scaledOr(j, "fd_step_angle_deg", c.fd_step_angle, kDegToRad);
  c.lr_px = valueOr(j, "lr_px", c.lr_px);
  c.lr_angle = scaledOr(j, "lr_angle_deg", c.lr_angle, kDegToRad);
  c.lr_final_ratio = valueOr(j, "lr_final_ratio", c.lr_final_ratio);
  c.adam_beta1 = valueOr(j, "adam_beta1", c.adam_beta1);
  c.adam_beta2 = valueOr(j, "adam_beta2", c.adam_beta2);
  c.adam_epsilon = valueOr(j, "adam_epsilon", c.adam_epsilon);
  c.seed_count = valueOr(j, "seed_count", c.seed_count);
  c.convergence_tol = valueOr(j, "convergence_tol", c.convergence_tol);
  c.patience = valueOr(j, "patience", c.patience);
  c.seed_depth_min = scaledOr(j, "seed_depth_min_mm", c.seed_depth_min, 1e-3);
  c.seed_depth_max = scaledOr(j, "seed_depth_max_mm", c.seed_depth_max, 1e-3);
  c.seed_scan_theta1 = valueOr(j, "seed_scan_theta1", c.seed_scan_theta1);
  c.seed_scan_theta2 = valueOr(j, "seed_scan_theta2", c.seed_scan_theta2);
  c.seed_scan_mask_cap = valueOr(j, "seed_scan_mask_cap", c.seed_scan_mask_cap);
  c.empty_view_penalty = valueOr(j, "empty_view_penalty", c.empty_view_penalty);
  c.reject_mean_sq_px = valueOr(j, "reject_mean_sq_px", c.reject_mean_sq_px);
  c.validate();
  return c;
}

PlantModel plantModelFromJson(const json& j) {
  PlantModel p;
  p.bias = jointVectorOr(j, "bias_deg", p.bias);
  p.disturbance = jointVectorOr(j, "disturbance_deg", p.disturbance);
  p.beta = valueOr(j, "beta", p.beta);
  p.validate();
  return p;
}

PiGains piGainsFromJson(const json& j) {
  PiGains g;
  // Gains are dimensionless; only the clamp carries units.
  auto gain = [&](const char* key, JointVector& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number()) {
      out.setConstant(v.get<double>());
    } else if (v.is_array() && v.size() == 6) {
      for (int i = 0; i < 6; ++i) out(i) = v[i].get<double>();
    } else {
      throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a number or 6-element array");
    }
  };
  gain("kp", g.kp);
  gain("ki", g.ki);
  g.integrator_clamp = jointVectorOr(j, "integrator_clamp_deg", g.integrator_clamp);
  g.validate();
  return g;
}

DatasetConfig datasetConfigFromJson(const json& j) {
  DatasetConfig c;
  c.count = valueOr(j, "count", c.count);
  c.delta_range = scaledOr(j, "delta_range_deg", c.delta_range, kDegToRad);
  c.noise_px = valueOr(j, "noise_px", c.noise_px);
  c.region_center = jointVectorOr(j, "region_center_deg", c.region_center);
  c.region_half_width = jointVectorOr(j, "region_half_width_deg", c.region_half_width);
  c.unique_bound = scaledOr(j, "unique_bound_deg", c.unique_bound, kDegToRad);
  c.region_checks = valueOr(j, "region_checks", c.region_checks);
  c.region_trials = valueOr(j, "region_trials", c.region_trials);
  if (c.count < 1 || !(c.delta_range > 0.0) || !(c.noise_px >= 0.0) || !(c.unique_bound > 0.0) ||
      c.region_checks < 0 || c.region_trials < 1 || !(c.region_half_width.array() >= 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid dataset configuration");
  }
  return c;
}

TrainConfig trainConfigFromJson(const json& j) {
  TrainConfig c;
  c.hidden = valueOr(j, "hidden", c.hidden);
  c.epochs = valueOr(j, "epochs", c.epochs);
  c.batch_size = valueOr(j, "batch_size", c.batch_size);
  c.learning_rate = valueOr(j, "learning_rate", c.learning_rate);
  c.final_lr_ratio = valueOr(j, "final_lr_ratio", c.final_lr_ratio);
  c.beta1 = valueOr(j, "beta1", c.beta1);
  c.beta2 = valueOr(j, "beta2", c.beta2);
  c.epsilon = valueOr(j, "epsilon", c.epsilon);
  c.validation_fraction = valueOr(j, "validation_fraction", c.validation_fraction);
  if (c.epochs < 1 || c.batch_size < 1 || !(c.learning_rate > 0.0) || !(c.final_lr_ratio > 0.0) ||
      !(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }
  for (const int h : c.hidden) {
    if (h < 1) throw Error(ErrorCode::kInvalidArgument, "hidden layer sizes must be positive");
  }
  return c;
}

PlanConfig planConfigFromJson(const json& j) {
  PlanConfig c;
  c.max_step_pos = scaledOr(j, "max_step_pos_mm", c.max_step_pos, 1e-3);
  c.max_step_rot = scaledOr(j, "max_step_rot_deg", c.max_step_rot, kDegToRad);
  c.arc_step = scaledOr(j, "arc_step_deg", c.arc_step, kDegToRad);
  c.retreat_height = scaledOr(j, "retreat_height_mm", c.retreat_height, 1e-3);
  if (!(c.max_step_pos > 0.0) || !(c.max_step_rot > 0.0) || !(c.arc_step > 0.0) ||
      !(c.retreat_height >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid plan configuration");
  }
  return c;
}

std::string planCsv(const SuturePlan& plan, const std::string& hash) {
  std::string out = fileHeader(hash, "mm,deg");
  out += "segment,idx,arc_param,px,py,pz,qw,qx,qy,qz\n";
  for (const TrajectorySegment& seg : plan.segments) {
    for (std::size_t k = 0; k < seg.needle.size(); ++k) {
      const Waypoint& w = seg.needle[k];
      const Vec3 p = w.pose.translation() * 1e3;
      Eigen::Quaterniond q(w.pose.rotation());
      if (q.w() < 0.0) q.coeffs() = -q.coeffs();
      out += seg.label + "," + std::to_string(k) + "," + formatNumber(seg.circular ? w.param * kRadToDeg : w.param);
      for (const double v : {p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z()}) out += "," + formatNumber(v);
      out += "\n";
    }
  }
  return out;
}

std::string datasetCsv(const std::vector<CalibSample>& samples, const std::string& hash) {
  std::string out = fileHeader(hash, "deg,mm,px");
  const int features = samples.empty() ? 0 : static_cast<int>(samples.front().pixels.size());
  for (int i = 1; i <= 6; ++i) out += "qm" + std::to_string(i) + ",";
  for (int k = 1; k <= features; ++k) {
    out += "px" + std::to_string(k) + "x,px" + std::to_string(k) + "y,";
  }
  for (int i = 1; i <= 6; ++i) out += "dq" + std::to_string(i) + (i < 6 ? "," : "\n");
  for (const CalibSample& s : samples) {
    if (static_cast<int>(s.pixels.size()) != features) {
      throw Error(ErrorCode::kInvalidArgument, "samples disagree on the feature count");
    }
    const JointVector q = toDisplayUnits(s.q_msr);
    const JointVector dq = toDisplayUnits(s.delta_q);
    for (int i = 0; i < 6; ++i) out += formatNumber(q(i)) + ",";
    for (const Vec2& p : s.pixels) out += formatNumber(p.x()) + "," + formatNumber(p.y()) + ",";
    for (int i = 0; i < 6; ++i) out += formatNumber(dq(i)) + (i < 5 ? "," : "\n");
  }
  return out;
}

std::vector<CalibSample> parseDatasetCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<CalibSample> samples;
  int features = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::vector<std::string> cells = splitCsvLine(line);
    if (features < 0) {
      if (cells.size() < 12 || cells.size() % 2 != 0 || cells.front() != "qm1" || cells.back() != "dq6") {
        throw Error(ErrorCode::kInvalidArgument, "unexpected dataset header");
      }
      features = static_cast<int>(cells.size() - 12) / 2;
      continue;
    }
    if (static_cast<int>(cells.size()) != 12 + 2 * features) {
      throw Error(ErrorCode::kInvalidArgument, "dataset row has the wrong column count");
    }
    CalibSample s;
    JointVector q, dq;
    for (int i = 0; i < 6; ++i) q(i) = parseNumber(cells[i]);
    for (int k = 0; k < features; ++k) {
      s.pixels.emplace_back(parseNumber(cells[6 + 2 * k]), parseNumber(cells[7 + 2 * k]));
    }
    for (int i = 0; i < 6; ++i) dq(i) = parseNumber(cells[6 + 2 * features + i]);
    s.q_msr = fromDisplayUnits(q);
    s.delta_q = fromDisplayUnits(dq);
    samples.push_back(std::move(s));
  }
  if (features < 0) throw Error(ErrorCode::kInvalidArgument, "dataset has no header row");
  return samples;
}

Eigen::VectorXd calibrationInput(const JointVector& q_msr, const std::vector<Vec2>& pixels) {
  Eigen::VectorXd x(6 + 2 * static_cast<int>(pixels.size()));
  x.head<6>() = toDisplayUnits(q_msr);
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    x(6 + 2 * k) = pixels[k].x();
    x(7 + 2 * k) = pixels[k].y();
  }
  return x;
}

Eigen::MatrixXd calibrationInputs(const std::vector<CalibSample>& samples) {
  if (samples.empty()) return {};
  Eigen::MatrixXd x(6 + 2 * static_cast<int>(samples.front().pixels.size()), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) x.col(i) = calibrationInput(samples[i].q_msr, samples[i].pixels);
  return x;
}

Eigen::MatrixXd calibrationTargets(const std::vector<CalibSample>& samples) {
  Eigen::MatrixXd y(6, samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) y.col(i) = toDisplayUnits(samples[i].delta_q);
  return y;
}

}  // namespace suturekit

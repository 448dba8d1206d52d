// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "suturekit/calibration.hpp"
#include "suturekit/control.hpp"
#include "suturekit/kinematics.hpp"
#include "suturekit/mlp.hpp"
#include "suturekit/needle.hpp"
#include "suturekit/planning.hpp"
#include "suturekit/pose_estimator.hpp"

// File formats. Angles are degrees and lengths millimeters in every file;
// everything is converted to radians and meters on load.

namespace suturekit {

/// Throws kIo when the file cannot be read, kInvalidArgument on bad JSON.
nlohmann::json loadJson(const std::string& path);
/// Throws kIo.
void writeTextFile(const std::string& path, const std::string& content);
std::string readTextFile(const std::string& path);

/// 64-bit FNV-1a over the compact dump (keys sorted), as 16 hex digits.
std::string configHash(const nlohmann::json& config);

/// "# suturekit config_hash=<hash> units=<units>\n"
std::string fileHeader(const std::string& hash, const std::string& units);

/// Shortest round-trip decimal text for a double.
std::string formatNumber(double value);

/// {"position_mm": [x, y, z], "rpy_deg": [roll, pitch, yaw]} with
/// R = Rz(yaw) Ry(pitch) Rx(roll). Missing keys default to zero.
/// Also accepts {"rotation": 9 numbers row-major, "translation": meters}.
RigidPose poseFromJson(const nlohmann::json& j);

/// {"fx", "fy", "cx", "cy", "width", "height", "pose"}.
PinholeCamera cameraFromJson(const nlohmann::json& j);
/// {"left": camera, "right": camera}.
StereoRig rigFromJson(const nlohmann::json& j);

/// {"radius_mm", "arc_deg"}, defaults from NeedleShape.
NeedleShape needleShapeFromJson(const nlohmann::json& j);

/// {"base", "tool_mount_rpy_deg", "insertion_offset_mm", "pitch_to_yaw_mm",
///  "yaw_to_tip_mm", "limits": {"lo": [...], "hi": [...]} (deg, mm for q3),
///  "prismatic_scale_deg_per_mm"}; missing keys keep the defaults.
KinematicModel kinematicModelFromJson(const nlohmann::json& j);

/// Keys mirror EstimatorConfig field names; angles in degrees.
EstimatorConfig estimatorConfigFromJson(const nlohmann::json& j);

/// {"bias_deg", "disturbance_deg", "beta"}; 6-vectors in deg (mm for q3).
PlantModel plantModelFromJson(const nlohmann::json& j);
/// {"kp", "ki", "integrator_clamp_deg"}; scalars or 6-vectors.
PiGains piGainsFromJson(const nlohmann::json& j);

/// {"count", "delta_range_deg", "noise_px", "region_center_deg",
///  "region_half_width_deg", "unique_bound_deg", "region_checks",
///  "region_trials"}.
DatasetConfig datasetConfigFromJson(const nlohmann::json& j);
/// {"hidden", "epochs", "batch_size", "learning_rate", "final_lr_ratio",
///  "beta1", "beta2", "epsilon", "validation_fraction"}.
TrainConfig trainConfigFromJson(const nlohmann::json& j);
/// {"max_step_pos_mm", "max_step_rot_deg", "arc_step_deg", "retreat_height_mm"}.
PlanConfig planConfigFromJson(const nlohmann::json& j);

/// 6-vector in deg (mm for q3) from a JSON array, or a scalar applied to
/// every joint.
JointVector jointVectorFromJson(const nlohmann::json& j);

/// Dataset CSV: qm1..qm6, px1x, px1y, ..., dq1..dq6 in deg/mm and pixels,
/// preceded by the file header line.
/// Needle waypoints of a plan as segment,idx,arc_param,px,py,pz,qw,qx,qy,qz.
/// Positions in mm; arc_param in degrees on circular segments and as a path
/// fraction on linear ones.
std::string planCsv(const SuturePlan& plan, const std::string& hash);

std::string datasetCsv(const std::vector<CalibSample>& samples, const std::string& hash);
/// Throws kInvalidArgument on a malformed file.
std::vector<CalibSample> parseDatasetCsv(const std::string& text);

/// 14-row input matrix (q_msr in deg/mm, then pixels) and 6-row label matrix
/// (deg/mm), one column per sample.
Eigen::MatrixXd calibrationInputs(const std::vector<CalibSample>& samples);
Eigen::MatrixXd calibrationTargets(const std::vector<CalibSample>& samples);
Eigen::VectorXd calibrationInput(const JointVector& q_msr, const std::vector<Vec2>& pixels);

}  // namespace suturekit

// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "suturekit/calibration.hpp"
#include "suturekit/errors.hpp"
#include "suturekit/harness/harness.hpp"
#include "suturekit/kinematics.hpp"

namespace suturekit::harness::detail {

using nlohmann::json;
using nlohmann::ordered_json;

/// Runs a config-parsing step, turning library errors into UsageError.
template <typename F>
auto parseConfig(const std::string& what, F&& parse) -> decltype(parse()) {
  try {
    return std::forward<F>(parse)();
  } catch (const Error& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const json::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

/// Sub-object of the config, or an empty object when absent.
inline const json& section(const json& config, const char* key) {
  static const json kEmpty = json::object();
  if (!config.contains(key)) return kEmpty;
  const json& s = config.at(key);
  if (!s.is_object()) throw UsageError(std::string("'") + key + "' must be an object");
  return s;
}

template <typename T>
T setting(const json& config, const char* key, T fallback) {
  return parseConfig(std::string("'") + key + "'", [&] {
    return config.contains(key) ? config.at(key).get<T>() : fallback;
  });
}

/// Summary object that starts with the config hash and the unit legend.
inline ordered_json summaryHeader(const Context& ctx, const std::string& command, const std::string& units) {
  ordered_json s;
  s["config_hash"] = ctx.hash;
  s["units"] = units;
  s["command"] = command;
  s["seed"] = ctx.seed;
  return s;
}

std::filesystem::path outPath(const Context& ctx, const char* name);
void writeJson(const Context& ctx, const char* name, const ordered_json& j);
void writeText(const Context& ctx, const char* name, const std::string& text);

/// Existing file under out_dir, or UsageError naming the command that makes it.
std::filesystem::path requireInput(const Context& ctx, const char* name, const char* producer);

/// Kinematics, jaw features, calibration camera and dataset settings shared
/// by the calib commands and suture-run.
struct CalibrationSetup {
  KinematicModel model;
  FeatureModel features = FeatureModel::defaultJaw();
  DatasetConfig dataset;
  PinholeCamera camera{1.0, 1.0, 0.0, 0.0, 1, 1};
};

/// Reads "kinematics", "features" (mm), "dataset", "camera" and
/// "camera_distance_mm". `model_override` replaces the parsed model.
CalibrationSetup calibrationSetup(const json& config, const KinematicModel* model_override = nullptr);

inline std::ostream& log(const Context& ctx) { return *ctx.log; }

}  // namespace suturekit::harness::detail

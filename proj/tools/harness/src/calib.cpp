// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "suturekit/io.hpp"
#include "suturekit/mlp.hpp"
#include "suturekit/random.hpp"

namespace suturekit::harness {

using detail::json;
using detail::ordered_json;

namespace detail {

CalibrationSetup calibrationSetup(const json& config, const KinematicModel* model_override) {
  CalibrationSetup s;
  s.model = model_override ? *model_override
                           : parseConfig("kinematics", [&] { return kinematicModelFromJson(section(config, "kinematics")); });
  if (config.contains("features")) {
    s.features = parseConfig("features", [&] {
      std::vector<Vec3> pts;
      for (const json& p : config.at("features")) {
        pts.emplace_back(p.at(0).get<double>() * 1e-3, p.at(1).get<double>() * 1e-3, p.at(2).get<double>() * 1e-3);
      }
      return FeatureModel(std::move(pts));
    });
  }
  s.dataset = parseConfig("dataset", [&] { return datasetConfigFromJson(section(config, "dataset")); });
  const double distance = setting<double>(config, "camera_distance_mm", 200.0) * 1e-3;
  if (!(distance > 0.0)) throw UsageError("'camera_distance_mm' must be positive");
  s.camera = parseConfig("camera", [&] {
    return config.contains("camera") ? cameraFromJson(config.at("camera"))
                                     : defaultCalibrationCamera(s.model, s.dataset, distance);
  });
  return s;
}

}  // namespace detail

namespace {

int testCount(const json& cfg) {
  const int n = detail::setting<int>(detail::section(cfg, "dataset"), "test_count", 1000);
  if (n < 1) throw UsageError("'dataset.test_count' must be >= 1");
  return n;
}

std::vector<CalibSample> readDataset(const std::filesystem::path& path) {
  try {
    return parseDatasetCsv(readTextFile(path.string()));
  } catch (const Error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::vector<CalibSample> generate(const detail::CalibrationSetup& s, int count, std::uint64_t seed) {
  DatasetConfig dc = s.dataset;
  dc.count = count;
  try {
    return generateDataset(s.model, s.camera, s.features, dc, seed);
  } catch (const Error& e) {
    throw StageError("dataset", e.what());
  }
}

}  // namespace

ordered_json runCalibGen(const Context& ctx) {
  const detail::CalibrationSetup setup = detail::calibrationSetup(ctx.config);
  const int n_test = testCount(ctx.config);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CalibSample> train = generate(setup, setup.dataset.count, deriveSeed(ctx.seed, 0));
  const std::vector<CalibSample> test = generate(setup, n_test, deriveSeed(ctx.seed, 1));
  detail::writeText(ctx, kCalibTrainCsv, datasetCsv(train, ctx.hash));
  detail::writeText(ctx, kCalibTestCsv, datasetCsv(test, ctx.hash));

  double max_label = 0.0;
  for (const auto* set : {&train, &test}) {
    for (const CalibSample& c : *set) {
      JointVector scaled = c.delta_q;
      scaled(kPrismaticJoint) *= setup.model.prismatic_scale;
      max_label = std::max(max_label, scaled.cwiseAbs().maxCoeff());
    }
  }
  ordered_json summary = detail::summaryHeader(ctx, "calib gen", "deg,mm,px");
  summary["train_samples"] = train.size();
  summary["test_samples"] = test.size();
  summary["max_label_deg"] = max_label * kRadToDeg;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::log(ctx) << "calib gen: " << train.size() << " train + " << test.size() << " test samples in "
                   << seconds << " s\n";
  return summary;
}

ordered_json runCalibTrain(const Context& ctx) {
  const TrainConfig tc = detail::parseConfig("training", [&] { return trainConfigFromJson(detail::section(ctx.config, "training")); });
  const std::vector<CalibSample> data = readDataset(detail::requireInput(ctx, kCalibTrainCsv, "calib gen"));
  if (data.empty()) throw UsageError("training dataset is empty");

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  try {
    result = trainMlp(calibrationInputs(data), calibrationTargets(data), tc, deriveSeed(ctx.seed, 2));
  } catch (const Error& e) {
    throw StageError("train", e.what());
  }

  ordered_json model_file = detail::summaryHeader(ctx, "calib train", "input deg,mm,px; output deg,mm");
  model_file["model"] = ordered_json::parse(result.model.toJson().dump());
  detail::writeJson(ctx, kCalibModel, model_file);

  std::string loss = fileHeader(ctx.hash, "scaled_mse");
  loss += "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    loss += std::to_string(e + 1) + "," + formatNumber(result.train_loss[e]) + "," +
            (e < result.validation_loss.size() ? formatNumber(result.validation_loss[e]) : std::string()) + "\n";
  }
  detail::writeText(ctx, kCalibLoss, loss);

  ordered_json summary = detail::summaryHeader(ctx, "calib train", "scaled_mse");
  summary["epochs"] = result.train_loss.size();
  summary["final_train_loss"] = result.train_loss.back();
  summary["final_validation_loss"] =
      result.validation_loss.empty() ? ordered_json(nullptr) : ordered_json(result.validation_loss.back());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::log(ctx) << "calib train: " << result.train_loss.size() << " epochs in " << seconds
                   << " s, final loss " << result.train_loss.back() << "\n";
  return summary;
}

ordered_json runCalibEval(const Context& ctx) {
  const detail::CalibrationSetup setup = detail::calibrationSetup(ctx.config);
  const std::filesystem::path model_path = detail::requireInput(ctx, kCalibModel, "calib train");
  const std::vector<CalibSample> test = readDataset(detail::requireInput(ctx, kCalibTestCsv, "calib gen"));
  if (test.empty()) throw UsageError("test dataset is empty");

  const MlpModel model = detail::parseConfig(model_path.string(), [&] {
    const json j = loadJson(model_path.string());
    return MlpModel::fromJson(j.at("model"));
  });
  if (model.sizes().front() != 6 + 2 * static_cast<int>(test.front().pixels.size()) || model.sizes().back() != 6) {
    throw UsageError("model input/output size does not match the dataset");
  }

  const auto mlp = evaluateCalibration(
      [&](const CalibSample& s) {
        return JointVector(fromDisplayUnits(JointVector(model.forward(calibrationInput(s.q_msr, s.pixels)))));
      },
      test);

  // Direct constrained-IK calibration on the same samples, as a reference.
  std::vector<CalibSample> solved;
  std::vector<JointVector> direct;
  int failures = 0;
  for (const CalibSample& s : test) {
    try {
      direct.push_back(calibrateDirect(setup.model, setup.camera, setup.features, s.q_msr, s.pixels,
                                       setup.dataset.unique_bound));
      solved.push_back(s);
    } catch (const Error&) {
      ++failures;
    }
  }
  std::size_t cursor = 0;
  const auto reference = solved.empty() ? std::array<JointErrorRow, 6>{}
                                        : evaluateCalibration([&](const CalibSample&) { return direct[cursor++]; }, solved);

  std::string csv = fileHeader(ctx.hash, "deg,mm");
  csv += "joint,unit,mlp_mean,mlp_std,direct_mean,direct_std\n";
  ordered_json joints = ordered_json::array();
  for (int j = 0; j < 6; ++j) {
    const char* unit = j == kPrismaticJoint ? "mm" : "deg";
    csv += "q" + std::to_string(j + 1) + "," + unit + "," + formatNumber(mlp[j].mean) + "," +
           formatNumber(mlp[j].std) + "," + formatNumber(reference[j].mean) + "," + formatNumber(reference[j].std) +
           "\n";
    joints.push_back({{"joint", "q" + std::to_string(j + 1)},
                      {"unit", unit},
                      {"mlp_mean", mlp[j].mean},
                      {"mlp_std", mlp[j].std},
                      {"direct_mean", reference[j].mean},
                      {"direct_std", reference[j].std}});
  }
  detail::writeText(ctx, kCalibEvalCsv, csv);

  ordered_json summary = detail::summaryHeader(ctx, "calib eval", "deg,mm");
  summary["test_samples"] = test.size();
  summary["direct_failures"] = failures;
  summary["joints"] = joints;
  detail::writeJson(ctx, kCalibEvalSummary, summary);
  for (const auto& j : joints) {
    detail::log(ctx) << "  " << j["joint"].get<std::string>() << ": mlp " << j["mlp_mean"].get<double>() << " +/- "
                     << j["mlp_std"].get<double>() << " " << j["unit"].get<std::string>() << ", direct "
                     << j["direct_mean"].get<double>() << "\n";
  }
  return summary;
}

}  // namespace suturekit::harness

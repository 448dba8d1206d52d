// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "suturekit/errors.hpp"
#include "suturekit/io.hpp"
#include "test_util.hpp"

namespace suturekit {
namespace {

using nlohmann::json;

TEST(ConfigHash, StableAndSensitive) {
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  EXPECT_EQ(configHash(a), configHash(b));
  EXPECT_EQ(configHash(a).size(), 16u);
  EXPECT_NE(configHash(a), configHash(json::parse(R"({"a": [1, 2], "b": 2})")));
}

TEST(FileHeader, Format) {
  EXPECT_EQ(fileHeader("00ff", "mm,deg"), "# suturekit config_hash=00ff units=mm,deg\n");
}

TEST(FormatNumber, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(u(rng) * 10));
    EXPECT_EQ(std::stod(formatNumber(x)), x);
  }
  EXPECT_EQ(formatNumber(0.5), "0.5");
  EXPECT_EQ(formatNumber(3.0), "3");
}

TEST(PoseJson, MillimeterDegreeForm) {
  const RigidPose p = poseFromJson(json::parse(R"({"position_mm": [1, 2, 3], "rpy_deg": [0, 0, 90]})"));
  EXPECT_LT((p.translation() - Vec3(0.001, 0.002, 0.003)).norm(), 1e-15);
  EXPECT_LT((p.rotation() - rotZ(kPi / 2)).norm(), 1e-12);
}

TEST(PoseJson, MatrixForm) {
  const RigidPose p =
      poseFromJson(json::parse(R"({"rotation": [0, -1, 0, 1, 0, 0, 0, 0, 1], "translation": [0.1, 0, -0.2]})"));
  EXPECT_LT((p.rotation() - rotZ(kPi / 2)).norm(), 1e-12);
  EXPECT_LT((p.translation() - Vec3(0.1, 0, -0.2)).norm(), 1e-15);
  EXPECT_THROW(poseFromJson(json::parse(R"({"rotation": [1, 0, 0, 0, 1, 0, 0, 0, -1]})")), Error);
  EXPECT_THROW(poseFromJson(json::parse(R"({"rotation": [2, 0, 0, 0, 1, 0, 0, 0, 1]})")), Error);
  EXPECT_THROW(poseFromJson(json::parse(R"({"rotation": [1, 0, 0]})")), Error);
  EXPECT_THROW(poseFromJson(json::parse(R"({"translation": [1, 0]})")), Error);
  EXPECT_THROW(poseFromJson(json::parse("[1, 2, 3]")), Error);
}

TEST(CameraJson, DefaultsAndValidation) {
  const PinholeCamera c = cameraFromJson(json::parse(R"({"fx": 800, "width": 320, "height": 240})"));
  EXPECT_EQ(c.width(), 320);
  EXPECT_EQ(c.height(), 240);
  const Vec2 center = c.project(Vec3(0, 0, 1));
  EXPECT_NEAR(center.x(), 160.0, 1e-12);
  EXPECT_NEAR(center.y(), 120.0, 1e-12);
  EXPECT_NEAR(c.project(Vec3(0.1, 0.1, 1)).y(), 200.0, 1e-9);
  EXPECT_THROW(cameraFromJson(json::parse(R"({"fx": -1})")), Error);
  EXPECT_THROW(cameraFromJson(json::parse(R"({"fx": "big"})")), Error);
  EXPECT_THROW(rigFromJson(json::parse(R"({"left": {}})")), Error);
}

TEST(JointVectorJson, DisplayUnits) {
  const JointVector q = jointVectorFromJson(json::parse("[90, 0, 10, 0, 0, -180]"));
  EXPECT_NEAR(q(0), kPi / 2, 1e-15);
  EXPECT_NEAR(q(kPrismaticJoint), 0.01, 1e-15);
  EXPECT_NEAR(q(5), -kPi, 1e-15);
  const JointVector c = jointVectorFromJson(json(1.0));
  EXPECT_NEAR(c(kPrismaticJoint), 1e-3, 1e-18);
  EXPECT_NEAR(c(0), kDegToRad, 1e-18);
  EXPECT_THROW(jointVectorFromJson(json::parse("[1, 2]")), Error);
  EXPECT_THROW(jointVectorFromJson(json::parse(R"(["a", 0, 0, 0, 0, 0])")), Error);
}

TEST(SettingsJson, Validation) {
  EXPECT_NEAR(needleShapeFromJson(json::parse(R"({"radius_mm": 12})")).radius, 0.012, 1e-15);
  EXPECT_THROW(needleShapeFromJson(json::parse(R"({"radius_mm": -1})")), Error);
  EXPECT_THROW(plantModelFromJson(json::parse(R"({"beta": 1.5})")), Error);
  EXPECT_THROW(piGainsFromJson(json::parse(R"({"kp": [1, 2]})")), Error);
  EXPECT_THROW(trainConfigFromJson(json::parse(R"({"epochs": 0})")), Error);
  EXPECT_THROW(trainConfigFromJson(json::parse(R"({"hidden": [4, 0]})")), Error);
  EXPECT_THROW(datasetConfigFromJson(json::parse(R"({"count": 0})")), Error);
  EXPECT_THROW(planConfigFromJson(json::parse(R"({"arc_step_deg": 0})")), Error);
  EXPECT_THROW(estimatorConfigFromJson(json::parse(R"({"max_steps": "many"})")), Error);
  const PlanConfig pc = planConfigFromJson(json::parse(R"({"retreat_height_mm": 5})"));
  EXPECT_NEAR(pc.retreat_height, 0.005, 1e-15);
  const KinematicModel m = kinematicModelFromJson(json::parse(R"({"pitch_to_yaw_mm": 8})"));
  EXPECT_NEAR(m.pitch_to_yaw, 0.008, 1e-15);
}

TEST(DatasetCsv, RoundTrip) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<CalibSample> samples(20);
  for (CalibSample& s : samples) {
    for (int i = 0; i < 6; ++i) {
      s.q_msr(i) = n(rng);
      s.delta_q(i) = 0.01 * n(rng);
    }
    for (int k = 0; k < 4; ++k) s.pixels.emplace_back(300 * n(rng), 300 * n(rng));
  }
  const std::string text = datasetCsv(samples, "abc");
  std::istringstream lines(text);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(first, "# suturekit config_hash=abc units=deg,mm,px");
  EXPECT_EQ(second,
            "qm1,qm2,qm3,qm4,qm5,qm6,px1x,px1y,px2x,px2y,px3x,px3y,px4x,px4y,dq1,dq2,dq3,dq4,dq5,dq6");
  const std::vector<CalibSample> back = parseDatasetCsv(text);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_LT((back[i].q_msr - samples[i].q_msr).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((back[i].delta_q - samples[i].delta_q).cwiseAbs().maxCoeff(), 1e-16);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(back[i].pixels[k], samples[i].pixels[k]);
  }
  EXPECT_EQ(datasetCsv(back, "abc"), datasetCsv(parseDatasetCsv(datasetCsv(back, "abc")), "abc"));
}

TEST(DatasetCsv, Malformed) {
  EXPECT_THROW(parseDatasetCsv(""), Error);
  EXPECT_THROW(parseDatasetCsv("a,b\n"), Error);
  const std::string header = "qm1,qm2,qm3,qm4,qm5,qm6,dq1,dq2,dq3,dq4,dq5,dq6\n";
  EXPECT_EQ(parseDatasetCsv(header).size(), 0u);
  EXPECT_THROW(parseDatasetCsv(header + "1,2,3\n"), Error);
  EXPECT_THROW(parseDatasetCsv(header + "1,2,3,4,5,6,7,8,9,10,11,x\n"), Error);
}

TEST(CalibrationInput, Layout) {
  JointVector q = JointVector::Zero();
  q(kPrismaticJoint) = 0.05;
  q(0) = kPi / 2;
  const Eigen::VectorXd x = calibrationInput(q, {Vec2(1, 2), Vec2(3, 4)});
  ASSERT_EQ(x.size(), 10);
  EXPECT_NEAR(x(0), 90.0, 1e-12);
  EXPECT_NEAR(x(2), 50.0, 1e-12);
  EXPECT_EQ(x(6), 1.0);
  EXPECT_EQ(x(9), 4.0);
}

TEST(PlanCsv, ColumnsAndUnits) {
  const SuturePorts ports{Vec3(0.01, 0, 0), Vec3(-0.01, 0, 0), Vec3::UnitZ()};
  const SuturePlan plan = planSuturePass(RigidPose::fromTranslation(Vec3(0, 0, 0.05)), ports, NeedleShape{},
                                         RigidPose::identity());
  const std::string text = planCsv(plan, "h");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# suturekit config_hash=h units=mm,deg");
  std::getline(in, line);
  EXPECT_EQ(line, "segment,idx,arc_param,px,py,pz,qw,qx,qy,qz");
  std::size_t rows = 0;
  bool saw_deepest = false;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 10u);
    const double qw = std::stod(cells[6]);
    EXPECT_GE(qw, 0.0);
    double qn = 0.0;
    for (int k = 6; k < 10; ++k) qn += std::stod(cells[k]) * std::stod(cells[k]);
    EXPECT_NEAR(qn, 1.0, 1e-12);
    if (cells[0] == "insertion" || cells[0] == "extraction") {
      // Needle center stays at the circle center (origin) in mm.
      EXPECT_NEAR(std::stod(cells[3]), 0.0, 1e-9);
      if (std::abs(std::stod(cells[2]) - 270.0) < 1e-9) saw_deepest = true;
    } else {
      EXPECT_GE(std::stod(cells[2]), 0.0);
      EXPECT_LE(std::stod(cells[2]), 1.0);
    }
  }
  EXPECT_TRUE(saw_deepest);
  std::size_t expected = 0;
  for (const auto& s : plan.segments) expected += s.needle.size();
  EXPECT_EQ(rows, expected);
}

TEST(TextFiles, RoundTripAndMissing) {
  const auto path = std::filesystem::temp_directory_path() / "suturekit_io_test.txt";
  writeTextFile(path.string(), "a\nb\n");
  EXPECT_EQ(readTextFile(path.string()), "a\nb\n");
  std::filesystem::remove(path);
  try {
    readTextFile(path.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_THROW(loadJson(path.string()), Error);
}

}  // namespace
}  // namespace suturekit

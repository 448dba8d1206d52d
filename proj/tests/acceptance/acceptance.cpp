// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "suturekit/calibration.hpp"
#include "suturekit/io.hpp"
#include "suturekit/kinematics.hpp"
#include "suturekit/mlp.hpp"
#include "suturekit/planning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace suturekit;

struct Paths {
  std::string cli;
  fs::path configs;
  fs::path work;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs the CLI with stdout/stderr appended to work/cli.log; returns the exit code.
int runCli(const Paths& p, const std::string& args) {
  const std::string cmd = quote(p.cli) + " " + args + " >> " + quote((p.work / "cli.log").string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json configWith(const Paths& p, const std::string& name, const json& patch) {
  json cfg = loadJson((p.configs / name).string());
  cfg.merge_patch(patch);
  return cfg;
}

std::string writeConfig(const Paths& p, const std::string& name, const json& cfg) {
  const fs::path path = p.work / name;
  writeTextFile(path.string(), cfg.dump(2));
  return path.string();
}

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// 1: pose estimation accuracy on 100 noiseless scenes.
Outcome poseAccuracy(const Paths& p) {
  const fs::path out = p.work / "c1";
  const auto t0 = std::chrono::steady_clock::now();
  const int code = runCli(p, "pose-bench --config " + quote((p.configs / "pose_bench.json").string()) +
                                 " --scenes 100 --out-dir " + quote(out.string()));
  const double elapsed = seconds(t0);
  if (code != 0) return {false, "pose-bench exit code " + std::to_string(code)};
  const json s = loadJson((out / "pose_bench_summary.json").string());
  const json& a = s["aggregates"][0];
  const double pos = a["position_error_mm"]["mean"].get<double>();
  const double ang = a["angular_error_deg"]["mean"].get<double>();
  const int finite = a["finite"].get<int>();
  return {finite == 100 && pos <= 0.5 && ang <= 2.0,
          "mean position " + fmt(pos) + " mm, mean angle " + fmt(ang) + " deg over " + std::to_string(finite) +
              " scenes, " + fmt(elapsed, 3) + " s"};
}

// 2: 30% contiguous occlusion in both views.
Outcome occlusion(const Paths& p) {
  const fs::path out = p.work / "c2";
  const json cfg = configWith(p, "pose_bench.json", {{"occlusion_fractions", {0.3}}, {"seed", 20260103}});
  const int code = runCli(p, "pose-bench --config " + quote(writeConfig(p, "c2.json", cfg)) +
                                 " --scenes 100 --out-dir " + quote(out.string()));
  if (code != 0) return {false, "pose-bench exit code " + std::to_string(code)};
  const json s = loadJson((out / "pose_bench_summary.json").string());
  const double frac = s["aggregates"][0]["within_1mm_fraction"].get<double>();
  return {frac >= 0.9, fmt(100.0 * frac, 3) + "% of 100 scenes converged within 1 mm"};
}

// 3: noiseless direct calibration on 1000 samples of a verified-unique region.
Outcome directCalibration() {
  const KinematicModel model;
  DatasetConfig dc;
  dc.count = 1000;
  const PinholeCamera camera = defaultCalibrationCamera(model, dc);
  const FeatureModel features = FeatureModel::defaultJaw();
  // generateDataset rejects regions that are not unique under the bound.
  const std::vector<CalibSample> samples = generateDataset(model, camera, features, dc, 3003);
  double worst = 0.0;
  int failures = 0;
  for (const CalibSample& s : samples) {
    try {
      const JointVector dq = calibrateDirect(model, camera, features, s.q_msr, s.pixels, dc.unique_bound);
      worst = std::max(worst, (dq - s.delta_q).cwiseAbs().maxCoeff());
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0 && worst <= 1e-6 && samples.size() == 1000,
          std::to_string(samples.size()) + " trials, " + std::to_string(failures) + " failures, max error " +
              fmt(worst, 3)};
}

// 4: MLP calibration protocol, gen + train + eval.
Outcome mlpCalibration(const Paths& p) {
  const fs::path out = p.work / "c4";
  const std::string cfg = quote((p.configs / "calib.json").string());
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* step : {"gen", "train", "eval"}) {
    const int code = runCli(p, std::string("calib ") + step + " --config " + cfg + " --out-dir " + quote(out.string()));
    if (code != 0) return {false, std::string("calib ") + step + " exit code " + std::to_string(code)};
  }
  const double elapsed = seconds(t0);
  const json s = loadJson((out / "calib_eval_summary.json").string());
  bool ok = elapsed <= 15 * 60;
  std::string detail = "MAE";
  for (const json& j : s["joints"]) {
    const double mae = j["mlp_mean"].get<double>();
    ok = ok && mae <= 0.5;
    detail += " " + j["joint"].get<std::string>() + "=" + fmt(mae, 3) + j["unit"].get<std::string>();
  }
  return {ok, detail + ", " + fmt(elapsed, 4) + " s"};
}

// 5: PI steady-state error reduction on every joint.
Outcome control(const Paths& p) {
  const fs::path out = p.work / "c5";
  const int code =
      runCli(p, "control-sim --config " + quote((p.configs / "control_sim.json").string()) + " --out-dir " +
                    quote(out.string()));
  if (code != 0) return {false, "control-sim exit code " + std::to_string(code)};
  const json s = loadJson((out / "control_summary.json").string());
  bool ok = true;
  double worst = 100.0;
  for (const json& j : s["joints"]) {
    const double r = j["reduction_pct"].get<double>();
    worst = std::min(worst, r);
    ok = ok && r >= 98.0;
  }
  return {ok, "smallest reduction " + fmt(worst, 5) + "%"};
}

/// Transform product over the joint chain, written against Eigen directly.
Eigen::Isometry3d chainOracle(const KinematicModel& m, const JointVector& q) {
  auto rot = [](double a, const Vec3& axis) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = Eigen::AngleAxisd(a, axis).toRotationMatrix();
    return t;
  };
  auto slide = [](double d) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translation() = Vec3(0, 0, d);
    return t;
  };
  Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
  base.linear() = m.base.rotation();
  base.translation() = m.base.translation();
  Eigen::Isometry3d mount = Eigen::Isometry3d::Identity();
  mount.linear() = m.tool_mount;
  return base * rot(q(0), Vec3::UnitZ()) * rot(q(1), Vec3::UnitX()) * mount * slide(m.insertion_offset + q(2)) *
         rot(q(3), Vec3::UnitZ()) * rot(q(4), Vec3::UnitX()) * rot(q(5), Vec3::UnitZ()) *
         slide(m.pitch_to_yaw + m.yaw_to_tip);
}

// 6: ik(fk(q)) contains q; fk matches the oracle.
Outcome kinematics() {
  const KinematicModel m;
  std::mt19937_64 rng(6006);
  double worst_member = 0.0, worst_fk = 0.0;
  int missing = 0;
  for (int i = 0; i < 1000; ++i) {
    JointVector q;
    for (int j = 0; j < 6; ++j) {
      const double lo = m.limits.lo[j] + (j == kPrismaticJoint ? 0.01 : 0.05);
      const double hi = m.limits.hi[j] - (j == kPrismaticJoint ? 0.0 : 0.05);
      q(j) = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    const RigidPose pose = fk(m, q);
    const Eigen::Isometry3d oracle = chainOracle(m, q);
    worst_fk = std::max({worst_fk, (pose.rotation() - oracle.linear()).cwiseAbs().maxCoeff(),
                         (pose.translation() - oracle.translation()).cwiseAbs().maxCoeff()});
    double best = INFINITY;
    for (const JointVector& s : ik(m, pose).solutions) best = std::min(best, jointDifference(s, q).cwiseAbs().maxCoeff());
    if (!(best <= 1e-9)) ++missing;
    if (std::isfinite(best)) worst_member = std::max(worst_member, best);
  }
  return {missing == 0 && worst_fk <= 1e-12,
          std::to_string(missing) + " missing roundtrips, closest-solution error " + fmt(worst_member, 3) +
              ", fk vs oracle " + fmt(worst_fk, 3)};
}

// 7: circular and linear trajectory geometry.
Outcome trajectories() {
  std::mt19937_64 rng(7007);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 0.99);
  auto unit = [&] { return Vec3(n(rng), n(rng), n(rng)).normalized(); };
  double radius_err = 0.0, port_err = 0.0, step_excess = -INFINITY;
  for (int i = 0; i < 200; ++i) {
    NeedleShape shape;
    shape.radius = 0.005 + 0.01 * u(rng);
    const Vec3 normal = unit();
    Vec3 dir = unit();
    dir = (dir - dir.dot(normal) * normal).normalized();
    const Vec3 entry = 0.05 * unit();
    const SuturePorts ports{entry, entry + 2.0 * shape.radius * u(rng) * dir, normal};
    const RigidPose grasp(Mat3(Eigen::AngleAxisd(n(rng), unit())), 0.01 * unit());
    const SuturePlan plan = planSuturePass(RigidPose(Mat3::Identity(), 0.1 * unit()), ports, shape, grasp);
    for (const TrajectorySegment& seg : plan.segments) {
      if (!seg.circular) continue;
      for (const Waypoint& w : seg.needle) {
        radius_err = std::max(radius_err, std::abs((tipPoint(w.pose, shape) - plan.circle.center).norm() - shape.radius));
      }
    }
    port_err = std::max({port_err, (tipPoint(plan.segments[1].needle.front().pose, shape) - ports.entry).norm(),
                         (tipPoint(plan.segments[2].needle.back().pose, shape) - ports.exit).norm()});

    const RigidPose a(Mat3(Eigen::AngleAxisd(4 * n(rng), unit())), 0.2 * unit());
    const RigidPose b(Mat3(Eigen::AngleAxisd(4 * n(rng), unit())), 0.2 * unit());
    const double sp = 0.001 + 0.02 * u(rng), sr = 0.01 + 0.2 * u(rng);
    const auto path = linearTrajectory(a, b, sp, sr);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      step_excess = std::max({step_excess, (path[k + 1].pose.translation() - path[k].pose.translation()).norm() - sp,
                              rotationDistance(path[k + 1].pose.rotation(), path[k].pose.rotation()) - sr});
    }
  }
  return {radius_err <= 1e-9 && port_err <= 1e-9 && step_excess <= 1e-12,
          "radius " + fmt(radius_err, 3) + ", ports " + fmt(port_err, 3) + ", step excess " + fmt(step_excess, 3)};
}

// 8: backprop against central differences on the calibration architecture.
Outcome mlpGradient() {
  std::mt19937_64 rng(8008);
  std::normal_distribution<double> n(0.0, 1.0);
  MlpModel m({14, 40, 30, 20, 6}, 8);
  Eigen::MatrixXd x(14, 32), y(6, 32);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  for (int i = 0; i < y.size(); ++i) y.data()[i] = n(rng);
  Eigen::VectorXd grad;
  m.lossAndGradient(x, y, &grad);
  const Eigen::VectorXd p0 = m.parameters();
  std::uniform_int_distribution<int> pick(0, m.parameterCount() - 1);
  double worst = 0.0;
  int probes = 0;
  while (probes < 50) {
    const int i = pick(rng);
    const double h = 1e-6;
    Eigen::VectorXd p = p0;
    p(i) += h;
    m.setParameters(p);
    const double up = m.lossAndGradient(x, y, nullptr);
    p(i) -= 2 * h;
    m.setParameters(p);
    const double down = m.lossAndGradient(x, y, nullptr);
    m.setParameters(p0);
    const double fd = (up - down) / (2 * h);
    // Dead units give zero gradients on both sides; relative error is undefined there.
    if (std::abs(fd) < 1e-7 && std::abs(grad(i)) < 1e-7) continue;
    worst = std::max(worst, std::abs(fd - grad(i)) / std::max(std::abs(fd), std::abs(grad(i))));
    ++probes;
  }
  return {worst < 1e-4, std::to_string(probes) + " probes, max relative error " + fmt(worst, 3)};
}

bool sameTree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.empty() || names.size() != count_b) {
    why = "file sets differ under " + a.filename().string();
    return false;
  }
  for (const std::string& name : names) {
    if (!fs::exists(b / name) || readTextFile((a / name).string()) != readTextFile((b / name).string())) {
      why = name + " differs";
      return false;
    }
  }
  return true;
}

// 9: every command twice with the same seed, reduced sizes.
Outcome determinism(const Paths& p) {
  json calib = configWith(p, "calib.json", {{"dataset", {{"count", 400}, {"test_count", 50}}},
                                           {"training", {{"hidden", {32, 16}}, {"epochs", 4}, {"batch_size", 64}}}});
  const std::string calib_cfg = writeConfig(p, "c9_calib.json", calib);
  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Command> commands{
      {"pose-bench", {"pose-bench --scenes 3 --config " + quote((p.configs / "pose_bench_occlusion.json").string())}},
      {"calib", {"calib gen --config " + quote(calib_cfg), "calib train --config " + quote(calib_cfg),
                 "calib eval --config " + quote(calib_cfg)}},
      {"control-sim", {"control-sim --config " + quote((p.configs / "control_sim.json").string())}},
      {"suture-run", {"suture-run --config " + quote((p.configs / "suture_run.json").string())}},
  };
  std::string detail;
  bool ok = true;
  for (const Command& c : commands) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      const fs::path out = p.work / "c9" / (c.name + "_" + run);
      fs::remove_all(out);
      for (const std::string& args : c.args) {
        const int code = runCli(p, args + " --seed 99 --out-dir " + quote(out.string()));
        if (code != 0) return {false, c.name + " exit code " + std::to_string(code)};
      }
      dirs.push_back(out);
    }
    std::string why;
    const bool same = sameTree(dirs[0], dirs[1], why);
    ok = ok && same;
    detail += (detail.empty() ? "" : ", ") + c.name + (same ? " identical" : " " + why);
  }
  return {ok, detail};
}

// 10: compensated suture pass stays on the circle; removing compensation
// misses the exit port by at least 5x more.
Outcome sutureRun(const Paths& p) {
  const fs::path out = p.work / "c10";
  const int code = runCli(p, "suture-run --config " + quote((p.configs / "suture_run.json").string()) +
                                 " --out-dir " + quote(out.string()));
  if (code != 0) return {false, "suture-run exit code " + std::to_string(code)};
  const json s = loadJson((out / "suture_run_summary.json").string());
  const json& comp = s["runs"][0];
  const double dev = comp["max_circle_deviation_mm"].get<double>();
  const double ratio = s["exit_miss_ratio"].get<double>();
  const double bias = s["calibration"]["bias"][0].get<double>();
  return {comp["name"] == "compensated" && dev <= 0.5 && ratio >= 5.0,
          "max deviation " + fmt(dev) + " mm, exit miss ratio " + fmt(ratio) + " at " + fmt(bias, 3) + " deg bias"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"suturekit acceptance run"};
  Paths paths;
  std::string configs, work;
  std::vector<int> only;
  app.add_option("--cli", paths.cli, "suturekit executable")->required();
  app.add_option("--configs", configs, "directory with the shipped configs")->required();
  app.add_option("--work", work, "scratch directory")->required();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  paths.configs = configs;
  paths.work = work;
  fs::remove_all(paths.work);
  fs::create_directories(paths.work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pose estimation accuracy", [&] { return poseAccuracy(paths); }},
      {"occlusion robustness", [&] { return occlusion(paths); }},
      {"direct calibration", [] { return directCalibration(); }},
      {"MLP calibration", [&] { return mlpCalibration(paths); }},
      {"PI error reduction", [&] { return control(paths); }},
      {"kinematics", [] { return kinematics(); }},
      {"trajectory geometry", [] { return trajectories(); }},
      {"MLP gradient check", [] { return mlpGradient(); }},
      {"determinism", [&] { return determinism(paths); }},
      {"suture pass", [&] { return sutureRun(paths); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

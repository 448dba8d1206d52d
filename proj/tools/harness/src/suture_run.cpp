// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <random>

#include "detail.hpp"
#include "suturekit/control.hpp"
#include "suturekit/io.hpp"
#include "suturekit/mlp.hpp"
#include "suturekit/perception.hpp"
#include "suturekit/planning.hpp"
#include "suturekit/pose_estimator.hpp"
#include "suturekit/random.hpp"

namespace suturekit::harness {

using detail::json;
using detail::ordered_json;

namespace {

struct SceneSettings {
  Vec3 entry{-0.007, 0.0, 0.0};
  Vec3 exit{0.007, 0.0, 0.0};
  Vec3 tissue_normal = Vec3::UnitZ();
  JointVector deepest_q;
  double grasp_arc_fraction = 0.75;
  double stand_lift = 0.025;
  double stand_jitter_pos = 0.002;
  double stand_jitter_rot = 5.0 * kDegToRad;
  double rig_distance = 0.14;
  double rig_elevation = 30.0 * kDegToRad;
  double baseline = 0.02;
};

/// Everything the robot does not know exactly, plus what it believes.
struct World {
  NeedleShape shape;
  KinematicModel model;
  SuturePorts ports;
  RigidPose grasp_design;  ///< needle_from_tool the planner aims for
  RigidPose needle_on_stand;
  StereoRig rig{PinholeCamera(1, 1, 0, 0, 1, 1), PinholeCamera(1, 1, 0, 0, 1, 1, RigidPose::fromTranslation(Vec3::UnitX()))};
};

struct WaypointRecord {
  std::string segment;
  int index = 0;
  double param = 0.0;
  Vec3 tip = Vec3::Zero();
  double circle_deviation = std::nan("");
  double tip_error = std::nan("");
  int servo_steps = 0;
  bool converged = true;
};

struct Execution {
  std::string name;
  JointVector dq_hat;
  std::vector<WaypointRecord> records;
  SuturePlan plan;
  double max_circle_deviation = 0.0;
  double exit_miss = 0.0;
  int not_converged = 0;
};

Vec3 vec3Setting(const json& cfg, const char* key, const Vec3& fallback) {
  if (!cfg.contains(key)) return fallback;
  return detail::parseConfig(key, [&] {
    const json& a = cfg.at(key);
    if (!a.is_array() || a.size() != 3) throw Error(ErrorCode::kInvalidArgument, "expected a 3-element array");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  });
}

SceneSettings sceneSettings(const json& cfg) {
  SceneSettings s;
  s.entry = vec3Setting(cfg, "entry_mm", s.entry * 1e3) * 1e-3;
  s.exit = vec3Setting(cfg, "exit_mm", s.exit * 1e3) * 1e-3;
  s.tissue_normal = vec3Setting(cfg, "tissue_normal", s.tissue_normal);
  if (!(s.tissue_normal.norm() > 0.0)) throw UsageError("'tissue_normal' must be non-zero");
  s.tissue_normal.normalize();
  s.deepest_q = cfg.contains("deepest_q_deg")
                    ? detail::parseConfig("deepest_q_deg", [&] { return jointVectorFromJson(cfg.at("deepest_q_deg")); })
                    : fromDisplayUnits((JointVector() << 0.0, 30.0, 100.0, 0.0, 45.0, 0.0).finished());
  s.grasp_arc_fraction = detail::setting<double>(cfg, "grasp_arc_fraction", s.grasp_arc_fraction);
  s.stand_lift = detail::setting<double>(cfg, "stand_lift_mm", s.stand_lift * 1e3) * 1e-3;
  s.stand_jitter_pos = detail::setting<double>(cfg, "stand_jitter_mm", s.stand_jitter_pos * 1e3) * 1e-3;
  s.stand_jitter_rot = detail::setting<double>(cfg, "stand_jitter_deg", 5.0) * kDegToRad;
  s.rig_distance = detail::setting<double>(cfg, "rig_distance_mm", s.rig_distance * 1e3) * 1e-3;
  s.rig_elevation = detail::setting<double>(cfg, "rig_elevation_deg", 30.0) * kDegToRad;
  s.baseline = detail::setting<double>(cfg, "baseline_mm", s.baseline * 1e3) * 1e-3;
  if (!(s.grasp_arc_fraction >= 0.0 && s.grasp_arc_fraction <= 1.0) || !(s.stand_jitter_pos >= 0.0) ||
      !(s.stand_jitter_rot >= 0.0) || !(s.rig_distance > 0.0) || !(s.baseline > 0.0)) {
    throw UsageError("invalid scene settings");
  }
  return s;
}

Vec3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

/// Builds the scene. The robot base is placed so that `deepest_q` puts the
/// tool exactly where the plan needs it at the deepest point of the stitch.
World buildWorld(const SceneSettings& s, const NeedleShape& shape, const KinematicModel& kin, std::uint64_t seed) {
  World w;
  w.shape = shape;
  w.ports = {s.entry, s.exit, s.tissue_normal};
  const SutureCircle circle = sutureCircle(w.ports, shape.radius);

  const Vec3 grasp_point = shape.localPoint(s.grasp_arc_fraction * shape.arc_angle);
  Mat3 rg;
  rg.col(0) = grasp_point.normalized();
  rg.col(2) = Vec3::UnitZ();
  rg.col(1) = rg.col(2).cross(rg.col(0));
  w.grasp_design = RigidPose(rg, grasp_point);

  w.model = kin;
  w.model.base = RigidPose::identity();
  const RigidPose deepest_tool = needlePoseOnCircle(circle, shape, SutureCircle::kPsiDeepest) * w.grasp_design;
  w.model.base = deepest_tool * fk(w.model, s.deepest_q).inverse();

  std::mt19937_64 rng(deriveSeed(seed, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RigidPose entry_pose = needlePoseOnCircle(circle, shape, circle.psi_entry);
  const Mat3 jitter_rot = rotAxisAngle(randomUnit(rng), s.stand_jitter_rot * unit(rng));
  const Vec3 jitter_pos = randomUnit(rng) * s.stand_jitter_pos * unit(rng);
  const Vec3 stand_center = entry_pose.translation() + s.stand_lift * s.tissue_normal + jitter_pos;
  w.needle_on_stand = RigidPose(nearestRotation(jitter_rot * entry_pose.rotation()), stand_center);

  // Parallel stereo pair on the side the needle faces, looking down at it.
  Vec3 facing = w.needle_on_stand.rotation().col(2);
  facing -= facing.dot(s.tissue_normal) * s.tissue_normal;
  if (facing.norm() < 1e-6) facing = Vec3::UnitX();
  facing.normalize();
  const Vec3 eye = stand_center + s.rig_distance * (std::cos(s.rig_elevation) * facing +
                                                    std::sin(s.rig_elevation) * s.tissue_normal);
  const RigidPose mid = lookAt(eye, stand_center, -s.tissue_normal);
  const RigidPose left = mid * RigidPose::fromTranslation(Vec3(-0.5 * s.baseline, 0.0, 0.0));
  const RigidPose right = mid * RigidPose::fromTranslation(Vec3(0.5 * s.baseline, 0.0, 0.0));
  w.rig = StereoRig(PinholeCamera(1000.0, 1000.0, 320.0, 240.0, 640, 480, left),
                    PinholeCamera(1000.0, 1000.0, 320.0, 240.0, 640, 480, right));
  for (int i = 0; i <= 48; ++i) {
    const Vec3 p = arcPoint(w.needle_on_stand, shape, shape.arc_angle * i / 48);
    for (int v = 0; v < 2; ++v) {
      const PinholeCamera& cam = w.rig.view(v);
      const Vec3 pc = cam.toCamera(p);
      if (!(pc.z() > 1e-3) || !cam.inImage(cam.projectCameraPoint(pc), 5.0)) {
        throw Error(ErrorCode::kInvalidArgument, "needle on the stand is not fully visible");
      }
    }
  }
  return w;
}

double circleDeviation(const SutureCircle& c, const Vec3& p) {
  const Vec3 axis = c.e1.cross(c.e2);
  const Vec3 v = p - c.center;
  const double axial = v.dot(axis);
  const double radial = (v - axial * axis).norm();
  return std::hypot(axial, radial - c.radius);
}

/// IK solution nearest to `previous`, unwrapped so that revolute joints move
/// continuously.
JointVector nearestIk(const KinematicModel& model, const RigidPose& target, const JointVector& previous) {
  const IkResult r = ik(model, target, {false, previous(3)});
  if (r.solutions.empty()) throw Error(ErrorCode::kNoSolution, "no in-limit IK solution");
  const JointVector* best = &r.solutions.front();
  for (const JointVector& q : r.solutions) {
    if (jointDistance(model, q, previous) < jointDistance(model, *best, previous)) best = &q;
  }
  return previous + jointDifference(*best, previous);
}

struct ServoSettings {
  PiGains gains;
  PlantModel plant;
  int max_steps = 200;
  JointVector tol;
};

Execution execute(const std::string& name, const World& w, const SuturePorts& ports, const RigidPose& needle_est,
                  const JointVector& q_home, const JointVector& dq_hat, const ServoSettings& ss,
                  const JointVector& deepest_q, const PlanConfig& plan_config) {
  Execution ex;
  ex.name = name;
  ex.dq_hat = dq_hat;
  Plant plant(ss.plant, q_home + ss.plant.bias);
  PiController controller(ss.gains);

  auto servo = [&](const JointVector& q_des) {
    const ServoTrace t = servoTo(plant, controller, dq_hat, q_des, ss.max_steps, ss.tol);
    if (!t.converged) ++ex.not_converged;
    return t;
  };

  // Grasp the needle where the estimate says it is.
  JointVector q_des;
  try {
    q_des = nearestIk(w.model, needle_est * w.grasp_design, deepest_q);
  } catch (const Error& e) {
    throw StageError("grasp", e.what());
  }
  servo(q_des);
  const RigidPose grasp_true = w.needle_on_stand.inverse() * fk(w.model, plant.actual());
  const RigidPose grasp_belief = needle_est.inverse() * fk(w.model, plant.measured() + dq_hat);

  SuturePlan& plan = ex.plan;
  try {
    plan = planSuturePass(fk(w.model, plant.measured() + dq_hat), ports, w.shape, grasp_belief, plan_config);
  } catch (const Error& e) {
    throw StageError("plan", e.what());
  }

  const RigidPose grasp_true_inv = grasp_true.inverse();
  for (const TrajectorySegment& seg : plan.segments) {
    for (std::size_t k = 0; k < seg.tool.size(); ++k) {
      try {
        q_des = nearestIk(w.model, seg.tool[k].pose, q_des);
      } catch (const Error& e) {
        throw StageError("ik", seg.label + " waypoint " + std::to_string(k) + ": " + e.what());
      }
      const ServoTrace t = servo(q_des);
      WaypointRecord rec;
      rec.segment = seg.label;
      rec.index = static_cast<int>(k);
      rec.param = seg.tool[k].param;
      rec.tip = tipPoint(fk(w.model, plant.actual()) * grasp_true_inv, w.shape);
      rec.servo_steps = static_cast<int>(t.steps.size());
      rec.converged = t.converged;
      if (seg.circular) {
        rec.circle_deviation = circleDeviation(plan.circle, rec.tip);
        rec.tip_error = (rec.tip - plan.circle.point(rec.param)).norm();
        ex.max_circle_deviation = std::max(ex.max_circle_deviation, rec.circle_deviation);
      }
      ex.records.push_back(rec);
    }
    if (seg.label == "extraction") ex.exit_miss = (ex.records.back().tip - ports.exit).norm();
  }
  return ex;
}

}  // namespace

ordered_json runSutureRun(const Context& ctx) {
  const json& cfg = ctx.config;
  const auto t0 = std::chrono::steady_clock::now();
  const NeedleShape shape = detail::parseConfig("needle", [&] { return needleShapeFromJson(detail::section(cfg, "needle")); });
  const SceneSettings scene = sceneSettings(detail::section(cfg, "scene"));
  const KinematicModel kin = detail::parseConfig("kinematics", [&] { return kinematicModelFromJson(detail::section(cfg, "kinematics")); });
  const EstimatorConfig est = detail::parseConfig("estimator", [&] { return estimatorConfigFromJson(detail::section(cfg, "estimator")); });
  const PlanConfig plan_config = detail::parseConfig("plan", [&] { return planConfigFromJson(detail::section(cfg, "plan")); });
  const json& perc = detail::section(cfg, "perception");
  const double line_width = detail::setting<double>(perc, "line_width_px", 2.0);
  const double kp_noise = detail::setting<double>(perc, "keypoint_noise_px", 0.0);
  const double feature_noise = detail::setting<double>(perc, "feature_noise_px", 0.0);
  if (!(line_width > 0.0) || !(kp_noise >= 0.0) || !(feature_noise >= 0.0)) throw UsageError("invalid perception settings");

  ServoSettings ss;
  ss.gains = detail::parseConfig("gains", [&] { return piGainsFromJson(detail::section(cfg, "gains")); });
  ss.plant = detail::parseConfig("plant", [&] { return plantModelFromJson(detail::section(cfg, "plant")); });
  JointVector bias = JointVector::Constant(3.0 * kDegToRad);
  bias(kPrismaticJoint) /= kin.prismatic_scale;
  if (cfg.contains("bias_deg")) bias = detail::parseConfig("bias_deg", [&] { return jointVectorFromJson(cfg.at("bias_deg")); });
  ss.plant.bias = bias;
  const json& servo_cfg = detail::section(cfg, "servo");
  ss.max_steps = detail::setting<int>(servo_cfg, "max_steps", 200);
  ss.tol = servo_cfg.contains("tol_deg")
               ? detail::parseConfig("servo.tol_deg", [&] { return jointVectorFromJson(servo_cfg.at("tol_deg")); })
               : fromDisplayUnits(JointVector::Constant(1e-3));
  if (ss.max_steps < 1 || !(ss.tol.array() > 0.0).all()) throw UsageError("invalid servo settings");

  const std::string mode = detail::setting<std::string>(cfg, "compensation", "direct");
  if (mode != "direct" && mode != "exact" && mode != "none" && mode != "mlp") {
    throw UsageError("'compensation' must be direct, exact, mlp or none");
  }
  const bool compare = detail::setting<bool>(cfg, "compare_uncompensated", true);
  MlpModel mlp;
  if (mode == "mlp") {
    const std::string path = detail::setting<std::string>(cfg, "mlp_model", "");
    if (path.empty() || !std::filesystem::is_regular_file(path)) throw UsageError("'mlp_model' must name an existing model file");
    mlp = detail::parseConfig(path, [&] { return MlpModel::fromJson(loadJson(path).at("model")); });
  }

  World world = [&] {
    try {
      return buildWorld(scene, shape, kin, ctx.seed);
    } catch (const Error& e) {
      throw StageError("scene", e.what());
    }
  }();
  const detail::CalibrationSetup calib = detail::calibrationSetup(cfg, &world.model);

  // Perception and pose estimation of the needle on its stand.
  const SyntheticPerception perception(line_width, kp_noise);
  std::mt19937_64 obs_rng(deriveSeed(ctx.seed, 1));
  const NeedleScene needle_scene{world.rig, shape, world.needle_on_stand, std::nullopt};
  StereoObservation obs;
  try {
    obs = perception.observe(needle_scene, obs_rng);
  } catch (const Error& e) {
    throw StageError("perception", e.what());
  }
  RigidPose needle_est;
  try {
    needle_est = estimate(obs.masks, obs.hints, shape, world.rig, est).pose;
  } catch (const Error& e) {
    throw StageError("estimate", e.what());
  }

  // Joint-offset calibration from the jaw features at the home configuration.
  const JointVector q_home = calib.dataset.region_center;
  JointVector dq_hat = JointVector::Zero();
  if (mode == "exact") {
    dq_hat = bias;
  } else if (mode == "direct" || mode == "mlp") {
    std::mt19937_64 feat_rng(deriveSeed(ctx.seed, 2));
    try {
      const std::vector<Vec2> pixels =
          detectFeatures(calib.camera, fk(world.model, q_home + bias), calib.features, feature_noise, feat_rng);
      if (mode == "direct") {
        dq_hat = calibrateDirect(world.model, calib.camera, calib.features, q_home, pixels, calib.dataset.unique_bound);
      } else {
        if (mlp.sizes().front() != 6 + 2 * calib.features.size() || mlp.sizes().back() != 6) {
          throw Error(ErrorCode::kInvalidArgument, "model size does not match the feature count");
        }
        dq_hat = fromDisplayUnits(JointVector(mlp.forward(calibrationInput(q_home, pixels))));
      }
    } catch (const Error& e) {
      throw StageError("calibrate", e.what());
    }
  }

  std::vector<Execution> runs;
  runs.push_back(execute(mode == "none" ? "uncompensated" : "compensated", world, world.ports, needle_est, q_home,
                         dq_hat, ss, scene.deepest_q, plan_config));
  if (compare && mode != "none") {
    runs.push_back(execute("uncompensated", world, world.ports, needle_est, q_home, JointVector::Zero(), ss,
                           scene.deepest_q, plan_config));
  }

  std::string csv = fileHeader(ctx.hash, "mm,deg");
  csv += "run,segment,index,param,tip_x_mm,tip_y_mm,tip_z_mm,circle_deviation_mm,tip_error_mm,servo_steps,converged\n";
  for (const Execution& ex : runs) {
    for (const WaypointRecord& r : ex.records) {
      const bool circular = std::isfinite(r.circle_deviation);
      csv += ex.name + "," + r.segment + "," + std::to_string(r.index) + "," +
             formatNumber(circular ? r.param * kRadToDeg : r.param) + "," + formatNumber(r.tip.x() * 1e3) + "," +
             formatNumber(r.tip.y() * 1e3) + "," + formatNumber(r.tip.z() * 1e3) + "," +
             formatNumber(r.circle_deviation * 1e3) + "," + formatNumber(r.tip_error * 1e3) + "," +
             std::to_string(r.servo_steps) + "," + (r.converged ? "1" : "0") + "\n";
    }
  }
  detail::writeText(ctx, kSutureCsv, csv);
  detail::writeText(ctx, kSuturePlan, planCsv(runs.front().plan, ctx.hash));

  ordered_json summary = detail::summaryHeader(ctx, "suture-run", "mm,deg");
  summary["metrics_note"] = "self-defined end-to-end metrics";
  summary["compensation"] = mode;
  summary["estimation"] = {{"position_error_mm", positionError(needle_est, world.needle_on_stand) * 1e3},
                           {"angular_error_deg", angularError(needle_est, world.needle_on_stand) * kRadToDeg}};
  const JointVector bias_d = toDisplayUnits(bias);
  const JointVector dq_d = toDisplayUnits(dq_hat);
  summary["calibration"] = {{"bias", std::vector<double>(bias_d.data(), bias_d.data() + 6)},
                            {"dq_hat", std::vector<double>(dq_d.data(), dq_d.data() + 6)},
                            {"max_abs_error", (bias_d - dq_d).cwiseAbs().maxCoeff()}};
  ordered_json run_info = ordered_json::array();
  for (const Execution& ex : runs) {
    run_info.push_back({{"name", ex.name},
                        {"waypoints", ex.records.size()},
                        {"max_circle_deviation_mm", ex.max_circle_deviation * 1e3},
                        {"exit_miss_mm", ex.exit_miss * 1e3},
                        {"servo_not_converged", ex.not_converged}});
  }
  summary["runs"] = run_info;
  if (runs.size() == 2) {
    summary["exit_miss_ratio"] = runs[0].exit_miss > 0.0 ? runs[1].exit_miss / runs[0].exit_miss : std::nan("");
  }
  detail::writeJson(ctx, kSutureSummary, summary);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::log(ctx) << "suture-run: " << seconds << " s\n";
  for (const auto& r : run_info) {
    detail::log(ctx) << "  " << r["name"].get<std::string>() << ": max circle deviation "
                     << r["max_circle_deviation_mm"].get<double>() << " mm, exit miss " << r["exit_miss_mm"].get<double>()
                     << " mm\n";
  }
  return summary;
}

}  // namespace suturekit::harness

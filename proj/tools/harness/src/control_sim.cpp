// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <random>

#include "detail.hpp"
#include "suturekit/control.hpp"
#include "suturekit/io.hpp"
#include "suturekit/random.hpp"

namespace suturekit::harness {

using detail::json;
using detail::ordered_json;

namespace {

struct Run {
  std::string name;
  ServoTrace trace;
  JointVector final_error;  ///< |q_des - q_act| after the last step, display units
};

JointVector jointSetting(const json& cfg, const char* key, const JointVector& fallback) {
  if (!cfg.contains(key)) return fallback;
  return detail::parseConfig(key, [&] { return jointVectorFromJson(cfg.at(key)); });
}

}  // namespace

ordered_json runControlSim(const Context& ctx) {
  const json& cfg = ctx.config;
  const PlantModel plant_model = detail::parseConfig("plant", [&] { return plantModelFromJson(detail::section(cfg, "plant")); });
  const PiGains gains = detail::parseConfig("gains", [&] { return piGainsFromJson(detail::section(cfg, "gains")); });
  const int max_steps = detail::setting<int>(cfg, "max_steps", 300);
  if (max_steps < 1) throw UsageError("'max_steps' must be >= 1");
  const JointVector tol = jointSetting(cfg, "tol_deg", fromDisplayUnits(JointVector::Constant(1e-3)));
  if (!(tol.array() > 0.0).all()) throw UsageError("'tol_deg' must be positive");

  std::mt19937_64 rng(deriveSeed(ctx.seed, 0));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const JointVector center = DatasetConfig{}.region_center;
  JointVector jitter;
  for (int i = 0; i < 6; ++i) jitter(i) = unit(rng);
  JointVector step;
  for (int i = 0; i < 6; ++i) step(i) = unit(rng);
  const JointVector span = fromDisplayUnits(JointVector::Constant(10.0));
  const JointVector q_start = jointSetting(cfg, "q_start_deg", center + span.cwiseProduct(jitter));
  const JointVector q_goal = jointSetting(cfg, "q_goal_deg", q_start + span.cwiseProduct(step));

  JointVector dq_hat = plant_model.bias;
  if (cfg.contains("dq_hat")) {
    const json& d = cfg.at("dq_hat");
    if (d.is_string()) {
      const std::string mode = d.get<std::string>();
      if (mode == "zero") {
        dq_hat.setZero();
      } else if (mode != "exact") {
        throw UsageError("'dq_hat' must be \"exact\", \"zero\" or a joint vector");
      }
    } else {
      dq_hat = detail::parseConfig("dq_hat", [&] { return jointVectorFromJson(d); });
    }
  }

  auto simulate = [&](const std::string& name, const PiGains& g, const JointVector& estimate) {
    Plant plant(plant_model, q_start);
    PiController controller(g);
    Run run{name, servoTo(plant, controller, estimate, q_goal, max_steps, tol), JointVector::Zero()};
    const JointVector q_act = run.trace.steps.empty() ? plant.actual() : run.trace.steps.back().q_act;
    run.final_error = toDisplayUnits(q_goal - q_act).cwiseAbs();
    return run;
  };
  const std::vector<Run> runs{simulate("pi_off", PiGains::off(), dq_hat), simulate("pi_on", gains, dq_hat),
                              simulate("pi_on_zero_dq_hat", gains, JointVector::Zero())};

  std::string csv = fileHeader(ctx.hash, "deg,mm");
  csv += "run,step,j,q_des,q_cmd,q_act,q_msr,q_msr_comp,err\n";
  for (const Run& run : runs) {
    for (std::size_t k = 0; k < run.trace.steps.size(); ++k) {
      const ServoStep& s = run.trace.steps[k];
      const std::array<JointVector, 6> cols{toDisplayUnits(s.q_des), toDisplayUnits(s.q_cmd),
                                            toDisplayUnits(s.q_act), toDisplayUnits(s.q_msr),
                                            toDisplayUnits(s.q_msr_comp), toDisplayUnits(s.err)};
      for (int j = 0; j < 6; ++j) {
        csv += run.name + "," + std::to_string(k + 1) + "," + std::to_string(j + 1);
        for (const JointVector& c : cols) csv += "," + formatNumber(c(j));
        csv += "\n";
      }
    }
  }
  detail::writeText(ctx, kControlTrace, csv);

  ordered_json summary = detail::summaryHeader(ctx, "control-sim", "deg,mm");
  ordered_json run_info = ordered_json::array();
  for (const Run& run : runs) {
    run_info.push_back({{"name", run.name},
                        {"steps", run.trace.steps.size()},
                        {"converged", run.trace.converged},
                        {"status", run.trace.converged ? "converged" : "not_converged"}});
  }
  summary["runs"] = run_info;
  ordered_json joints = ordered_json::array();
  const JointVector bias = toDisplayUnits(plant_model.bias).cwiseAbs();
  for (int j = 0; j < 6; ++j) {
    const double off = runs[0].final_error(j);
    const double on = runs[1].final_error(j);
    joints.push_back({{"joint", "q" + std::to_string(j + 1)},
                      {"unit", j == kPrismaticJoint ? "mm" : "deg"},
                      {"steady_error_pi_off", off},
                      {"steady_error_pi_on", on},
                      {"reduction_pct", off > 0.0 ? 100.0 * (1.0 - on / off) : 0.0},
                      {"steady_error_zero_dq_hat", runs[2].final_error(j)},
                      {"bias", bias(j)}});
  }
  summary["joints"] = joints;
  detail::writeJson(ctx, kControlSummary, summary);
  for (const auto& j : joints) {
    detail::log(ctx) << "  " << j["joint"].get<std::string>() << ": off " << j["steady_error_pi_off"].get<double>()
                     << ", on " << j["steady_error_pi_on"].get<double>() << ", reduction "
                     << j["reduction_pct"].get<double>() << "%\n";
  }
  return summary;
}

}  // namespace suturekit::harness

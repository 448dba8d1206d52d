// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"
#include "suturekit/errors.hpp"
#include "suturekit/harness/harness.hpp"

namespace {

namespace h = suturekit::harness;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void addCommonOptions(CLI::App* cmd, h::CommandOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON configuration file")->required();
  cmd->add_option("--seed", opts.seed, "Override the configured RNG seed");
  cmd->add_option("--out-dir", opts.out_dir, "Override the output directory");
  cmd->add_option("--scenes", opts.scenes, "Override the scene count");
  cmd->add_option("--threads", opts.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"suturekit experiment harness"};
  app.require_subcommand(1);
  h::CommandOptions opts;

  std::function<nlohmann::ordered_json(const h::Context&)> run;

  CLI::App* pose = app.add_subcommand("pose-bench", "Needle pose estimation benchmark");
  addCommonOptions(pose, opts);
  pose->callback([&] { run = h::runPoseBench; });

  CLI::App* calib = app.add_subcommand("calib", "Joint-offset calibration dataset, training and evaluation");
  calib->require_subcommand(1);
  CLI::App* gen = calib->add_subcommand("gen", "Generate train and test datasets");
  CLI::App* train = calib->add_subcommand("train", "Train the calibration network");
  CLI::App* eval = calib->add_subcommand("eval", "Per-joint error table on the test set");
  for (CLI::App* c : {gen, train, eval}) addCommonOptions(c, opts);
  gen->callback([&] { run = h::runCalibGen; });
  train->callback([&] { run = h::runCalibTrain; });
  eval->callback([&] { run = h::runCalibEval; });

  CLI::App* control = app.add_subcommand("control-sim", "PI servo simulation, PI off versus on");
  addCommonOptions(control, opts);
  control->callback([&] { run = h::runControlSim; });

  CLI::App* suture = app.add_subcommand("suture-run", "End-to-end simulated suture pass");
  addCommonOptions(suture, opts);
  suture->callback([&] { run = h::runSutureRun; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const h::Context ctx = h::loadContext(opts, std::cout);
    run(ctx);
  } catch (const h::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const h::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

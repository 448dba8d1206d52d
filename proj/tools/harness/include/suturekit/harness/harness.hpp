// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace suturekit::harness {

/// Bad flags, unreadable or invalid configuration, missing prerequisite
/// files. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a pipeline stage. Maps to exit code 1.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& message)
      : std::runtime_error("stage " + stage + ": " + message), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> scenes;
  /// Worker threads for scene-level parallelism; 0 picks the hardware count.
  int threads = 0;
};

/// Effective configuration after command-line overrides.
struct Context {
  nlohmann::json config;
  std::string hash;  ///< configHash of `config`
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  int threads = 1;
  std::ostream* log = nullptr;
};

/// Reads the config file and folds the overrides into it ("seed", "out_dir",
/// "scenes") before hashing. Creates the output directory. Throws UsageError.
Context loadContext(const CommandOptions& options, std::ostream& log);

/// Runs body(i) for i in [0, count) on `threads` workers. Each index must
/// write only its own slot; the first exception is rethrown after all
/// workers stop.
void parallelFor(int count, int threads, const std::function<void(int)>& body);

/// Each command writes its files under ctx.out_dir and returns the summary it
/// wrote. Runtime is only logged, so files stay byte-identical across runs.
nlohmann::ordered_json runPoseBench(const Context& ctx);
nlohmann::ordered_json runCalibGen(const Context& ctx);
nlohmann::ordered_json runCalibTrain(const Context& ctx);
nlohmann::ordered_json runCalibEval(const Context& ctx);
nlohmann::ordered_json runControlSim(const Context& ctx);
nlohmann::ordered_json runSutureRun(const Context& ctx);

/// Per-occlusion aggregates recomputed from the pose-bench CSV text.
nlohmann::ordered_json poseBenchAggregates(const std::string& csv_text);

/// Recomputes the aggregates from the CSV and compares them with the summary.
/// Throws StageError("verify", ...) on a mismatch.
void verifyPoseBench(const std::string& csv_text, const nlohmann::ordered_json& summary);

/// File names inside the output directory.
inline constexpr const char* kPoseBenchCsv = "pose_bench.csv";
inline constexpr const char* kPoseBenchSummary = "pose_bench_summary.json";
inline constexpr const char* kCalibTrainCsv = "calib_train.csv";
inline constexpr const char* kCalibTestCsv = "calib_test.csv";
inline constexpr const char* kCalibModel = "calib_model.json";
inline constexpr const char* kCalibLoss = "calib_loss.csv";
inline constexpr const char* kCalibEvalCsv = "calib_eval.csv";
inline constexpr const char* kCalibEvalSummary = "calib_eval_summary.json";
inline constexpr const char* kControlTrace = "control_trace.csv";
inline constexpr const char* kControlSummary = "control_summary.json";
inline constexpr const char* kSutureCsv = "suture_run.csv";
inline constexpr const char* kSuturePlan = "suture_plan.csv";
inline constexpr const char* kSutureSummary = "suture_run_summary.json";

}  // namespace suturekit::harness

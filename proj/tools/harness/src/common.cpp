// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "detail.hpp"
#include "suturekit/io.hpp"

namespace suturekit::harness {

using detail::json;

Context loadContext(const CommandOptions& options, std::ostream& log) {
  if (options.config_path.empty()) throw UsageError("--config is required");
  json config = detail::parseConfig("config " + options.config_path, [&] { return loadJson(options.config_path); });
  if (!config.is_object()) throw UsageError("config root must be an object");

  if (options.seed) config["seed"] = *options.seed;
  if (options.scenes) {
    if (*options.scenes < 1) throw UsageError("--scenes must be >= 1");
    config["scenes"] = *options.scenes;
  }
  if (options.out_dir) config["out_dir"] = *options.out_dir;
  if (options.threads < 0) throw UsageError("--threads must be >= 0");

  Context ctx;
  ctx.seed = detail::setting<std::uint64_t>(config, "seed", 0);
  ctx.out_dir = detail::setting<std::string>(config, "out_dir", "out");
  if (config.contains("scenes") && detail::setting<int>(config, "scenes", 1) < 1) {
    throw UsageError("'scenes' must be >= 1");
  }
  // The output location is not part of the experiment.
  json hashed = config;
  hashed.erase("out_dir");
  ctx.hash = configHash(hashed);
  ctx.config = std::move(config);

  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) throw UsageError("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  ctx.threads = options.threads > 0 ? options.threads : static_cast<int>(hw);
  ctx.log = &log;
  return ctx;
}

void parallelFor(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load()) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace detail {

std::filesystem::path outPath(const Context& ctx, const char* name) { return ctx.out_dir / name; }

void writeJson(const Context& ctx, const char* name, const ordered_json& j) {
  writeText(ctx, name, j.dump(2) + "\n");
}

void writeText(const Context& ctx, const char* name, const std::string& text) {
  try {
    writeTextFile(outPath(ctx, name).string(), text);
  } catch (const Error& e) {
    throw StageError("write", e.what());
  }
}

std::filesystem::path requireInput(const Context& ctx, const char* name, const char* producer) {
  const std::filesystem::path p = outPath(ctx, name);
  if (!std::filesystem::is_regular_file(p)) {
    throw UsageError("missing " + p.string() + "; run '" + producer + "' first");
  }
  return p;
}

}  // namespace detail

}  // namespace suturekit::harness

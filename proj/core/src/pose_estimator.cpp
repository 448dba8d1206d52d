// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/pose_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace suturekit {

void EstimatorConfig::validate() const {
  if (max_steps < 1 || axis_sample_count < 2 || mask_pixel_cap < 1 || seed_count < 1 ||
      patience < 1 || seed_scan_theta1 < 1 || seed_scan_theta2 < seed_count) {
    throw Error(ErrorCode::kInvalidArgument, "estimator config has non-positive counts");
  }
  if (!(fd_step_px > 0.0) || !(fd_step_angle > 0.0) || !(lr_px > 0.0) || !(lr_angle > 0.0) ||
      !(lr_final_ratio > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "estimator step sizes must be positive");
  }
}

double offsetError(std::span<const Vec2> pixels, std::span<const Vec2> points) {
  if (pixels.empty()) return 0.0;
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "no points to measure against");
  const NearestPointIndex index(points);
  double sum = 0.0;
  for (const Vec2& p : pixels) sum += index.nearestSquaredDistance(p);
  return sum;
}

std::vector<Vec2> subsampleMask(const BinaryMask& mask, int cap) {
  const auto& fg = mask.foreground();
  const std::size_t n = fg.size();
  const std::size_t keep = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(cap, 1)));
  std::vector<Vec2> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    const Pixel& p = fg[k * n / keep];
    out.emplace_back(p.u, p.v);
  }
  return out;
}

ReprojectionObjective::ReprojectionObjective(const StereoMasks& masks, const NeedleShape& shape,
                                             const StereoRig& rig, const EstimatorConfig& config,
                                             int mask_pixel_cap)
    : shape_(shape), rig_(rig), config_(config) {
  if (masks[0].empty() && masks[1].empty()) {
    throw Error(ErrorCode::kEmptyMasks, "both masks are empty");
  }
  shape_.validate();
  for (int v = 0; v < 2; ++v) pixels_[v] = subsampleMask(masks[v], mask_pixel_cap);
  axis_local_ = sampleAxisPoints(RigidPose::identity(), shape_, config_.axis_sample_count);
}

ObjectiveReport ReprojectionObjective::evaluate(const NeedleParams& x) const {
  return evaluate(paramsToPose(x, shape_, rig_.left));
}

ObjectiveReport ReprojectionObjective::evaluate(const RigidPose& needle_pose) const {
  // Scratch reused across calls on the same thread.
  thread_local NearestPointIndex index;
  thread_local std::vector<Vec2> projected;

  ObjectiveReport report;
  for (int v = 0; v < 2; ++v) {
    const auto& pixels = pixels_[v];
    report.mask_pixels_used[v] = static_cast<int>(pixels.size());
    if (pixels.empty()) continue;
    const PinholeCamera& cam = rig_.view(v);
    const RigidPose camera_from_needle = cam.pose().inverse() * needle_pose;
    const Mat3& r = camera_from_needle.rotation();
    const Vec3& t = camera_from_needle.translation();
    projected.clear();
    for (const Vec3& local : axis_local_) {
      const Vec3 pc = r * local + t;
      if (pc.z() > 1e-12) projected.push_back(cam.projectCameraPoint(pc));
    }
    double sum = 0.0;
    if (projected.empty()) {
      sum = config_.empty_view_penalty * static_cast<double>(pixels.size());
    } else {
      index.build(projected);
      for (const Vec2& p : pixels) sum += index.nearestSquaredDistance(p);
    }
    report.per_view_value[v] = sum;
  }
  report.value = report.per_view_value[0] + report.per_view_value[1];
  return report;
}

bool ReprojectionObjective::feasible(const NeedleParams& x) const {
  const Vec3 a = rig_.left.backprojectRay(x.kp_st);
  const Vec3 b = rig_.left.backprojectRay(x.kp_ed);
  const double alpha = std::atan2(a.cross(b).norm(), a.dot(b));
  return alpha > 1e-6 && x.theta1 > 0.0 && x.theta1 < kPi - alpha;
}

NeedleParams::Vector ReprojectionObjective::gradient(const NeedleParams& x) const {
  const NeedleParams::Vector base = x.toVector();
  NeedleParams::Vector g = NeedleParams::Vector::Zero();
  for (int i = 0; i < 6; ++i) {
    const double h = i < 2 ? config_.fd_step_angle : config_.fd_step_px;
    NeedleParams::Vector plus = base, minus = base;
    plus(i) += h;
    minus(i) -= h;
    const NeedleParams xp = NeedleParams::fromVector(plus);
    const NeedleParams xm = NeedleParams::fromVector(minus);
    const bool ok_p = feasible(xp), ok_m = feasible(xm);
    if (ok_p && ok_m) {
      g(i) = (evaluate(xp).value - evaluate(xm).value) / (2.0 * h);
    } else if (ok_p) {
      g(i) = (evaluate(xp).value - evaluate(x).value) / h;
    } else if (ok_m) {
      g(i) = (evaluate(x).value - evaluate(xm).value) / h;
    }
  }
  return g;
}

ObjectiveReport objective(const NeedleParams& x, const StereoMasks& masks, const NeedleShape& shape,
                          const StereoRig& rig, const EstimatorConfig& config) {
  return ReprojectionObjective(masks, shape, rig, config, config.mask_pixel_cap).evaluate(x);
}

NeedleParams::Vector gradient(const NeedleParams& x, const StereoMasks& masks,
                              const NeedleShape& shape, const StereoRig& rig,
                              const EstimatorConfig& config) {
  return ReprojectionObjective(masks, shape, rig, config, config.mask_pixel_cap).gradient(x);
}

namespace {

double wrapTwoPi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace

RefineResult refine(const ReprojectionObjective& objective, const NeedleParams& start) {
  const EstimatorConfig& cfg = objective.config();
  using Vec6 = NeedleParams::Vector;

  Vec6 lr;
  lr << cfg.lr_angle, cfg.lr_angle, cfg.lr_px, cfg.lr_px, cfg.lr_px, cfg.lr_px;

  RefineResult out;
  out.params = start;
  out.report = objective.evaluate(start);
  out.initial_value = out.report.value;

  Vec6 x = start.toVector();
  Vec6 m = Vec6::Zero();
  Vec6 s = Vec6::Zero();
  double b1t = 1.0, b2t = 1.0;
  std::deque<double> best_history{out.report.value};

  for (int t = 1; t <= cfg.max_steps; ++t) {
    const Vec6 g = objective.gradient(NeedleParams::fromVector(x));
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    s = cfg.adam_beta2 * s + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    b1t *= cfg.adam_beta1;
    b2t *= cfg.adam_beta2;
    const Vec6 m_hat = m / (1.0 - b1t);
    const Vec6 s_hat = s / (1.0 - b2t);
    const double decay = std::pow(cfg.lr_final_ratio, static_cast<double>(t - 1) / cfg.max_steps);
    Vec6 step = (decay * lr).cwiseProduct(
        m_hat.cwiseQuotient((s_hat.cwiseSqrt().array() + cfg.adam_epsilon).matrix()));

    // Back off along the step until the parameters stay in the valid domain.
    NeedleParams candidate;
    bool moved = false;
    for (int halving = 0; halving < 20; ++halving) {
      Vec6 next = x - step;
      next(1) = wrapTwoPi(next(1));
      candidate = NeedleParams::fromVector(next);
      if (objective.feasible(candidate)) {
        x = next;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    out.steps_used = t;
    if (moved) {
      const ObjectiveReport r = objective.evaluate(candidate);
      if (r.value < out.report.value) {
        out.report = r;
        out.params = candidate;
      }
    }

    best_history.push_back(out.report.value);
    if (static_cast<int>(best_history.size()) > cfg.patience + 1) best_history.pop_front();
    if (static_cast<int>(best_history.size()) == cfg.patience + 1 &&
        best_history.front() - best_history.back() < cfg.convergence_tol) {
      break;
    }
  }
  return out;
}

EstimateResult estimate(const StereoMasks& masks, const std::array<Keypoints, 2>& hints,
                        const NeedleShape& shape, const StereoRig& rig,
                        const EstimatorConfig& config) {
  config.validate();
  const ReprojectionObjective full(masks, shape, rig, config, config.mask_pixel_cap);
  const ReprojectionObjective coarse(masks, shape, rig, config, config.seed_scan_mask_cap);

  const Keypoints& anchor = hints[0];
  const RayFrame rays = keypointRays(rig.left, anchor.start, anchor.end);
  const double theta1_max = kPi - rays.alpha;
  const double chord = shape.chordLength();

  // theta1 candidates whose mid-chord distance falls in the seeding range.
  std::vector<double> theta1_all, theta1_in_range;
  for (int i = 0; i < config.seed_scan_theta1; ++i) {
    const double th = theta1_max * (i + 0.5) / config.seed_scan_theta1;
    const auto [t_st, t_ed] = endpointDepths(rays.alpha, th, chord);
    const double depth = (0.5 * (t_st * rays.d_st + t_ed * rays.d_ed)).norm();
    theta1_all.push_back(th);
    if (depth >= config.seed_depth_min && depth <= config.seed_depth_max) {
      theta1_in_range.push_back(th);
    }
  }
  const std::vector<double>& theta1_grid = theta1_in_range.empty() ? theta1_all : theta1_in_range;

  // One seed per theta2 sector: the best coarse-scan point inside it.
  std::vector<NeedleParams> seeds;
  for (int sector = 0; sector < config.seed_count; ++sector) {
    const int j0 = sector * config.seed_scan_theta2 / config.seed_count;
    const int j1 = (sector + 1) * config.seed_scan_theta2 / config.seed_count;
    NeedleParams best_seed;
    double best_value = std::numeric_limits<double>::infinity();
    for (int j = j0; j < j1; ++j) {
      const double th2 = 2.0 * kPi * (j + 0.5) / config.seed_scan_theta2;
      for (double th1 : theta1_grid) {
        const NeedleParams x{th1, th2, anchor.start, anchor.end};
        const double value = coarse.evaluate(x).value;
        if (value < best_value) {
          best_value = value;
          best_seed = x;
        }
      }
    }
    seeds.push_back(best_seed);
  }

  EstimateResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const RefineResult r = refine(full, seeds[k]);
    result.seed_values.push_back(r.report.value);
    if (r.report.value < best) {
      best = r.report.value;
      result.params = r.params;
      result.report = r.report;
      result.steps_used = r.steps_used;
      result.best_seed = static_cast<int>(k);
    }
  }
  result.pose = paramsToPose(result.params, shape, rig.left);

  const int used = std::max(1, result.report.mask_pixels_used[0] + result.report.mask_pixels_used[1]);
  const double mean_sq = result.report.value / used;
  if (!(mean_sq <= config.reject_mean_sq_px)) {
    std::ostringstream msg;
    msg << "best objective " << result.report.value << " (" << mean_sq
        << " px^2 per pixel) exceeds the reject threshold " << config.reject_mean_sq_px;
    throw NoConvergenceError(msg.str(), std::move(result));
  }
  return result;
}

double positionError(const RigidPose& estimate, const RigidPose& truth) {
  return (estimate.translation() - truth.translation()).norm();
}

double angularError(const RigidPose& estimate, const RigidPose& truth) {
  return rotationDistance(estimate.rotation(), truth.rotation());
}

}  // namespace suturekit

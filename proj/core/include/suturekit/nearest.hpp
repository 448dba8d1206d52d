// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "suturekit/geometry.hpp"

namespace suturekit {

/// Exact 2-D nearest-point queries over a small point set. Nearby queries are
/// answered by a ring search on a uniform grid; far ones fall back to
/// bounding boxes over runs of consecutive input points, which stay tight when
/// the input is an ordered polyline.
class NearestPointIndex {
 public:
  NearestPointIndex() = default;
  explicit NearestPointIndex(std::span<const Vec2> points) { build(points); }

  void build(std::span<const Vec2> points);

  bool empty() const { return points_.empty(); }

  /// Squared distance from `query` to the closest indexed point (+inf when
  /// the index is empty).
  double nearestSquaredDistance(const Vec2& query) const;

 private:
  double origin_u_ = 0.0;
  double origin_v_ = 0.0;
  double cell_ = 1.0;
  double inv_cell_ = 1.0;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<int> cell_start_;
  std::vector<Vec2> points_;
  std::vector<int> fill_;

  struct Block {
    Vec2 lo, hi;
    int begin, end;
  };
  std::vector<Vec2> ordered_;
  std::vector<Block> blocks_;

  double blockSearch(const Vec2& query, double best) const;
};

/// Reference implementation, O(|points|) per query.
double bruteForceNearestSquaredDistance(std::span<const Vec2> points, const Vec2& query);

}  // namespace suturekit

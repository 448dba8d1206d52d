// Copyright 2026 The suturekit Authors
// SPDX-License-Identifier: Apache-2.0

#include "suturekit/nearest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace suturekit {

namespace {
constexpr int kMaxCellsPerSide = 64;
constexpr int kMaxBlocks = 32;
constexpr int kMinBlockSize = 16;
// Rings scanned before switching to the block search.
constexpr int kMaxRings = 2;
}

void NearestPointIndex::build(std::span<const Vec2> points) {
  points_.clear();
  cell_start_.clear();
  ordered_.clear();
  blocks_.clear();
  cols_ = rows_ = 0;
  if (points.empty()) return;

  double u_min = points[0].x(), u_max = u_min, v_min = points[0].y(), v_max = v_min;
  double path = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    u_min = std::min(u_min, points[i].x());
    u_max = std::max(u_max, points[i].x());
    v_min = std::min(v_min, points[i].y());
    v_max = std::max(v_max, points[i].y());
    if (i > 0) path += (points[i] - points[i - 1]).norm();
  }
  const double extent = std::max(u_max - u_min, v_max - v_min);
  // About two consecutive samples per cell, bounded grid size.
  cell_ = std::max({0.5, 2.0 * path / static_cast<double>(points.size()),
                    extent / kMaxCellsPerSide});
  inv_cell_ = 1.0 / cell_;
  origin_u_ = u_min;
  origin_v_ = v_min;
  cols_ = std::min(kMaxCellsPerSide, static_cast<int>((u_max - u_min) * inv_cell_) + 1);
  rows_ = std::min(kMaxCellsPerSide, static_cast<int>((v_max - v_min) * inv_cell_) + 1);

  const auto cellOf = [&](const Vec2& p) {
    const int i = std::min(cols_ - 1, static_cast<int>((p.x() - origin_u_) * inv_cell_));
    const int j = std::min(rows_ - 1, static_cast<int>((p.y() - origin_v_) * inv_cell_));
    return j * cols_ + i;
  };

  cell_start_.assign(static_cast<std::size_t>(cols_) * rows_ + 1, 0);
  for (const Vec2& p : points) ++cell_start_[cellOf(p) + 1];
  for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
  points_.resize(points.size());
  fill_.assign(cell_start_.begin(), cell_start_.end() - 1);
  for (const Vec2& p : points) points_[fill_[cellOf(p)]++] = p;

  ordered_.assign(points.begin(), points.end());
  const int n = static_cast<int>(points.size());
  const int block_size = std::max(kMinBlockSize, (n + kMaxBlocks - 1) / kMaxBlocks);
  for (int b = 0; b < n; b += block_size) {
    Block block{ordered_[b], ordered_[b], b, std::min(n, b + block_size)};
    for (int i = block.begin; i < block.end; ++i) {
      block.lo = block.lo.cwiseMin(ordered_[i]);
      block.hi = block.hi.cwiseMax(ordered_[i]);
    }
    blocks_.push_back(block);
  }
}

double NearestPointIndex::blockSearch(const Vec2& query, double best) const {
  std::array<double, kMaxBlocks + 1> bound{};
  const int count = static_cast<int>(blocks_.size());
  if (count == 0) return best;
  int first = 0;
  for (int b = 0; b < count; ++b) {
    const Block& blk = blocks_[b];
    const double du = std::max({blk.lo.x() - query.x(), 0.0, query.x() - blk.hi.x()});
    const double dv = std::max({blk.lo.y() - query.y(), 0.0, query.y() - blk.hi.y()});
    bound[b] = du * du + dv * dv;
    if (bound[b] < bound[first]) first = b;
  }
  const auto scan = [&](int b) {
    for (int i = blocks_[b].begin; i < blocks_[b].end; ++i) {
      best = std::min(best, (ordered_[i] - query).squaredNorm());
    }
  };
  if (bound[first] < best) scan(first);
  for (int b = 0; b < count; ++b) {
    if (b != first && bound[b] < best) scan(b);
  }
  return best;
}

double NearestPointIndex::nearestSquaredDistance(const Vec2& query) const {
  double best = std::numeric_limits<double>::infinity();
  if (points_.empty()) return best;

  const double fu = std::floor((query.x() - origin_u_) * inv_cell_);
  const double fv = std::floor((query.y() - origin_v_) * inv_cell_);
  // Queries far outside the grid: clamp the cell coordinate range to keep
  // integer arithmetic safe; ring lower bounds stay valid.
  const double lim = 1e6;
  const int ci = static_cast<int>(std::clamp(fu, -lim, lim));
  const int cj = static_cast<int>(std::clamp(fv, -lim, lim));

  const int du = ci < 0 ? -ci : (ci >= cols_ ? ci - cols_ + 1 : 0);
  const int dv = cj < 0 ? -cj : (cj >= rows_ ? cj - rows_ + 1 : 0);
  const int k_start = std::max(du, dv);
  const int k_end = std::max({std::abs(ci), std::abs(ci - cols_ + 1), std::abs(cj),
                              std::abs(cj - rows_ + 1)});

  const auto scanCell = [&](int i, int j) {
    const int c = j * cols_ + i;
    for (int n = cell_start_[c]; n < cell_start_[c + 1]; ++n) {
      best = std::min(best, (points_[n] - query).squaredNorm());
    }
  };

  if (k_start > kMaxRings) return blockSearch(query, best);
  for (int k = k_start; k <= k_end; ++k) {
    if (k > kMaxRings) return blockSearch(query, best);
    const int j0 = std::max(0, cj - k), j1 = std::min(rows_ - 1, cj + k);
    for (int j = j0; j <= j1; ++j) {
      if (j == cj - k || j == cj + k) {
        const int i0 = std::max(0, ci - k), i1 = std::min(cols_ - 1, ci + k);
        for (int i = i0; i <= i1; ++i) scanCell(i, j);
      } else {
        if (ci - k >= 0 && ci - k < cols_) scanCell(ci - k, j);
        if (k > 0 && ci + k >= 0 && ci + k < cols_) scanCell(ci + k, j);
      }
    }
    // Points not yet scanned lie outside the (2k+1)^2 block around the query
    // cell; their distance is at least the query's distance to that block's
    // border.
    const double left = query.x() - (origin_u_ + (ci - k) * cell_);
    const double right = origin_u_ + (ci + k + 1) * cell_ - query.x();
    const double top = query.y() - (origin_v_ + (cj - k) * cell_);
    const double bottom = origin_v_ + (cj + k + 1) * cell_ - query.y();
    const double bound = std::min({left, right, top, bottom});
    if (best <= bound * bound) break;
  }
  return best;
}

double bruteForceNearestSquaredDistance(std::span<const Vec2> points, const Vec2& query) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : points) best = std::min(best, (p - query).squaredNorm());
  return best;
}

}  // namespace suturekit

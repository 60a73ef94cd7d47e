/* Copyright 2026 The offyaw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "offyaw/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "offyaw/error.hpp"

namespace offyaw::raster {
namespace {

// Keeps cell indices of far-away queries well inside `long` range.
constexpr double kMaxCellIndex = 1e12;

long CellIndex(double coord, double origin, double cell) {
  const double c = std::floor((coord - origin) / cell);
  return static_cast<long>(std::clamp(c, -kMaxCellIndex, kMaxCellIndex));
}

}  // namespace

LanePointIndex::LanePointIndex(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw Error(ErrorCode::kEmptyScene, "cannot index an empty point set");
  }
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Entry& e : entries_) {
    min_x = std::min(min_x, e.point.x);
    min_y = std::min(min_y, e.point.y);
    max_x = std::max(max_x, e.point.x);
    max_y = std::max(max_y, e.point.y);
  }
  origin_x_ = min_x;
  origin_y_ = min_y;
  const double n = static_cast<double>(entries_.size());
  const double width = max_x - min_x;
  const double height = max_y - min_y;
  cell_ = std::max({std::sqrt(2.0 * width * height / n),
                    std::max(width, height) / std::sqrt(n), 1e-6});
  const auto budget = static_cast<long>(4 * entries_.size() + 16);
  for (;;) {
    cols_ = static_cast<long>(std::floor(width / cell_)) + 1;
    rows_ = static_cast<long>(std::floor(height / cell_)) + 1;
    if (cols_ * rows_ <= budget) break;
    cell_ *= 1.5;
  }

  const auto buckets = static_cast<std::size_t>(cols_ * rows_);
  std::vector<std::size_t> bucket_of(entries_.size());
  start_.assign(buckets + 1, 0);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const long cx = std::clamp(CellIndex(entries_[i].point.x, origin_x_, cell_),
                               0L, cols_ - 1);
    const long cy = std::clamp(CellIndex(entries_[i].point.y, origin_y_, cell_),
                               0L, rows_ - 1);
    bucket_of[i] = static_cast<std::size_t>(cy * cols_ + cx);
    ++start_[bucket_of[i] + 1];
  }
  for (std::size_t b = 0; b < buckets; ++b) start_[b + 1] += start_[b];
  order_.resize(entries_.size());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    order_[fill[bucket_of[i]]++] = i;
  }
}

void LanePointIndex::ScanCell(long cx, long cy, Point2 p, double& best_d2,
                              std::size_t& best_rank) const {
  const auto b = static_cast<std::size_t>(cy * cols_ + cx);
  for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
    const std::size_t rank = order_[k];
    const double d2 = geometry::SquaredDistance(entries_[rank].point, p);
    if (d2 < best_d2 || (d2 == best_d2 && rank < best_rank)) {
      best_d2 = d2;
      best_rank = rank;
    }
  }
}

scene::LanePointRef LanePointIndex::nearest(Point2 p) const {
  const long qx = CellIndex(p.x, origin_x_, cell_);
  const long qy = CellIndex(p.y, origin_y_, cell_);
  // Rings closer than the grid itself are empty.
  const long first_ring =
      std::max({0L, qx - (cols_ - 1), -qx, qy - (rows_ - 1), -qy});
  const long last_ring = std::max({qx, cols_ - 1 - qx, qy, rows_ - 1 - qy});

  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_rank = std::numeric_limits<std::size_t>::max();
  for (long r = first_ring; r <= last_ring; ++r) {
    if (r > 0 && best_d2 < std::numeric_limits<double>::infinity()) {
      // Ring r lies outside the block of Chebyshev radius r - 1 around the
      // query cell, which contains p.
      const double lo_x = origin_x_ + static_cast<double>(qx - r + 1) * cell_;
      const double hi_x = origin_x_ + static_cast<double>(qx + r) * cell_;
      const double lo_y = origin_y_ + static_cast<double>(qy - r + 1) * cell_;
      const double hi_y = origin_y_ + static_cast<double>(qy + r) * cell_;
      const double bound =
          std::max(0.0, std::min({p.x - lo_x, hi_x - p.x, p.y - lo_y, hi_y - p.y}));
      // Slack keeps exact-distance ties in later rings reachable.
      if (bound * bound > best_d2 * (1.0 + 1e-9) + 1e-18) break;
    }
    const long y_lo = std::max(qy - r, 0L);
    const long y_hi = std::min(qy + r, rows_ - 1);
    const long x_lo = std::max(qx - r, 0L);
    const long x_hi = std::min(qx + r, cols_ - 1);
    for (long cy = y_lo; cy <= y_hi; ++cy) {
      if (cy == qy - r || cy == qy + r) {
        for (long cx = x_lo; cx <= x_hi; ++cx) ScanCell(cx, cy, p, best_d2, best_rank);
      } else {
        if (qx - r >= 0 && qx - r < cols_) ScanCell(qx - r, cy, p, best_d2, best_rank);
        if (r > 0 && qx + r >= 0 && qx + r < cols_) {
          ScanCell(qx + r, cy, p, best_d2, best_rank);
        }
      }
    }
  }
  scene::LanePointRef ref = entries_[best_rank].ref;
  ref.squared_distance = best_d2;
  return ref;
}

LanePointIndex build_index(const scene::Scene& scene) {
  std::vector<LanePointIndex::Entry> entries;
  entries.reserve(scene.lane_point_count());
  for (std::size_t lane : scene.lane_order()) {
    const auto& points = scene.lanes()[lane].points;
    for (std::size_t i = 0; i < points.size(); ++i) {
      entries.push_back({points[i], {lane, i, 0.0}});
    }
  }
  return LanePointIndex(std::move(entries));
}

}  // namespace offyaw::raster

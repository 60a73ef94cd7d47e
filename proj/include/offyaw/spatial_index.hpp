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

#pragma once

#include <cstddef>
#include <vector>

#include "offyaw/scene.hpp"

namespace offyaw::raster {

using geometry::Point2;

// Uniform-grid bucketing of lane points for exact nearest-point queries.
//
// Entries are ranked by (squared distance, rank) where rank is the entry's
// position in the input order; for a scene the input order is lane-id order
// then point index, so results match scene::nearest_lane_point exactly.
class LanePointIndex {
 public:
  struct Entry {
    Point2 point;
    scene::LanePointRef ref;
  };

  // Throws kEmptyScene when `entries` is empty.
  explicit LanePointIndex(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }

  // Returned ref carries the squared distance to `p`.
  scene::LanePointRef nearest(Point2 p) const;

  double cell_size() const { return cell_; }

 private:
  void ScanCell(long cx, long cy, Point2 p, double& best_d2,
                std::size_t& best_rank) const;

  std::vector<Entry> entries_;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  double cell_ = 1.0;
  long cols_ = 1;
  long rows_ = 1;
  // CSR layout: bucket b holds ranks order_[start_[b] .. start_[b + 1]).
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

LanePointIndex build_index(const scene::Scene& scene);

}  // namespace offyaw::raster

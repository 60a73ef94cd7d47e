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

// Vector scene model: lanes with per-point travel headings, intersection and
// drivable-area polygons, and the ego pose. Also hosts the brute-force
// nearest-lane query that the raster pipeline is checked against.

#include <cstddef>
#include <string>
#include <vector>

#include "offyaw/geometry.hpp"

namespace offyaw::scene {

using geometry::AngleDeg;
using geometry::Point2;
using geometry::Pose;

inline constexpr double kDefaultMaxLaneSpacing = 1.0;

struct LanePolyline {
  std::string id;
  std::vector<Point2> points;
  // Direction of travel at each point, stored rather than derived.
  std::vector<AngleDeg> headings;

  friend bool operator==(const LanePolyline&, const LanePolyline&) = default;
};

enum class RegionKind { kIntersection, kDrivable };

struct PolygonRegion {
  std::vector<Point2> vertices;
  RegionKind kind = RegionKind::kDrivable;

  friend bool operator==(const PolygonRegion&, const PolygonRegion&) = default;
};

// Immutable once constructed. Construction validates every invariant and
// throws kEmptyScene / kInvalidScene.
class Scene {
 public:
  Scene(std::vector<LanePolyline> lanes, std::vector<PolygonRegion> regions,
        Pose ego, double max_lane_spacing = kDefaultMaxLaneSpacing);

  const std::vector<LanePolyline>& lanes() const { return lanes_; }
  const std::vector<PolygonRegion>& regions() const { return regions_; }
  const Pose& ego() const { return ego_; }

  // Lane indices sorted by id; this is the tie-break order for
  // equidistant lane points.
  const std::vector<std::size_t>& lane_order() const { return lane_order_; }

  std::size_t lane_point_count() const;
  bool has_region(RegionKind kind) const;

  friend bool operator==(const Scene& a, const Scene& b) {
    return a.lanes_ == b.lanes_ && a.regions_ == b.regions_ && a.ego_ == b.ego_;
  }

 private:
  std::vector<LanePolyline> lanes_;
  std::vector<PolygonRegion> regions_;
  Pose ego_;
  std::vector<std::size_t> lane_order_;
};

struct LanePointRef {
  std::size_t lane = 0;
  std::size_t point = 0;
  double squared_distance = 0.0;

  friend bool operator==(const LanePointRef&, const LanePointRef&) = default;
};

// Linear scan over every lane point. Ties on distance go to the lowest
// (lane id, point index) pair.
LanePointRef nearest_lane_point(const Scene& scene, Point2 p);

AngleDeg nearest_lane_heading(const Scene& scene, Point2 p);

// Even-odd rule; points on an edge or vertex count as inside.
bool point_in_polygon(const std::vector<Point2>& polygon, Point2 p);

bool in_region(const Scene& scene, Point2 p, RegionKind kind);

// True when no two non-adjacent edges of the closed polygon touch.
bool IsSimplePolygon(const std::vector<Point2>& polygon);

}  // namespace offyaw::scene

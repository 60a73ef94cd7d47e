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

#include "offyaw/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "offyaw/error.hpp"

namespace offyaw::scene {
namespace {

double Cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool OnSegment(Point2 a, Point2 b, Point2 p) {
  const double scale = std::max(1.0, geometry::SquaredDistance(a, b));
  if (std::abs(Cross(a, b, p)) > 1e-12 * scale) return false;
  return p.x >= std::min(a.x, b.x) - 1e-12 && p.x <= std::max(a.x, b.x) + 1e-12 &&
         p.y >= std::min(a.y, b.y) - 1e-12 && p.y <= std::max(a.y, b.y) + 1e-12;
}

int Sign(double v) { return (v > 0.0) - (v < 0.0); }

bool SegmentsTouch(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int d1 = Sign(Cross(c, d, a));
  const int d2 = Sign(Cross(c, d, b));
  const int d3 = Sign(Cross(a, b, c));
  const int d4 = Sign(Cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && OnSegment(c, d, a)) || (d2 == 0 && OnSegment(c, d, b)) ||
         (d3 == 0 && OnSegment(a, b, c)) || (d4 == 0 && OnSegment(a, b, d));
}

void ValidateLane(const LanePolyline& lane, double max_spacing) {
  if (lane.points.size() < 2) {
    throw Error(ErrorCode::kInvalidScene,
                "lane '" + lane.id + "' needs at least 2 points");
  }
  if (lane.headings.size() != lane.points.size()) {
    throw Error(ErrorCode::kInvalidScene,
                "lane '" + lane.id + "' has " +
                    std::to_string(lane.headings.size()) + " headings for " +
                    std::to_string(lane.points.size()) + " points");
  }
  for (std::size_t i = 0; i < lane.points.size(); ++i) {
    if (!geometry::IsFinite(lane.points[i])) {
      throw Error(ErrorCode::kInvalidScene,
                  "lane '" + lane.id + "' has a non-finite point");
    }
    if (i > 0 && geometry::Distance(lane.points[i - 1], lane.points[i]) >
                     max_spacing + 1e-9) {
      throw Error(ErrorCode::kInvalidScene,
                  "lane '" + lane.id + "' point spacing exceeds " +
                      std::to_string(max_spacing) + " m at index " +
                      std::to_string(i));
    }
  }
}

}  // namespace

Scene::Scene(std::vector<LanePolyline> lanes,
             std::vector<PolygonRegion> regions, Pose ego,
             double max_lane_spacing)
    : lanes_(std::move(lanes)), regions_(std::move(regions)), ego_(ego) {
  if (lanes_.empty()) {
    throw Error(ErrorCode::kEmptyScene, "scene has no lanes");
  }
  if (!(max_lane_spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max lane spacing must be > 0");
  }
  std::set<std::string> ids;
  for (const LanePolyline& lane : lanes_) {
    ValidateLane(lane, max_lane_spacing);
    if (!ids.insert(lane.id).second) {
      throw Error(ErrorCode::kInvalidScene, "duplicate lane id '" + lane.id + "'");
    }
  }
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    const auto& vertices = regions_[r].vertices;
    if (vertices.size() < 3) {
      throw Error(ErrorCode::kInvalidScene,
                  "region " + std::to_string(r) + " needs at least 3 vertices");
    }
    if (!std::all_of(vertices.begin(), vertices.end(), geometry::IsFinite)) {
      throw Error(ErrorCode::kInvalidScene,
                  "region " + std::to_string(r) + " has a non-finite vertex");
    }
    if (!IsSimplePolygon(vertices)) {
      throw Error(ErrorCode::kInvalidScene,
                  "region " + std::to_string(r) + " is self-intersecting");
    }
  }
  if (!geometry::IsFinite(ego_.position)) {
    throw Error(ErrorCode::kInvalidScene, "ego position is not finite");
  }
  lane_order_.resize(lanes_.size());
  std::iota(lane_order_.begin(), lane_order_.end(), std::size_t{0});
  std::sort(lane_order_.begin(), lane_order_.end(),
            [this](std::size_t a, std::size_t b) {
              return lanes_[a].id < lanes_[b].id;
            });
}

std::size_t Scene::lane_point_count() const {
  std::size_t n = 0;
  for (const auto& lane : lanes_) n += lane.points.size();
  return n;
}

bool Scene::has_region(RegionKind kind) const {
  return std::any_of(regions_.begin(), regions_.end(),
                     [kind](const PolygonRegion& r) { return r.kind == kind; });
}

LanePointRef nearest_lane_point(const Scene& scene, Point2 p) {
  LanePointRef best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  // Visiting lanes in id order and replacing only on a strictly smaller
  // distance leaves the lexicographically smallest tie in `best`.
  for (std::size_t lane : scene.lane_order()) {
    const auto& points = scene.lanes()[lane].points;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d2 = geometry::SquaredDistance(points[i], p);
      if (d2 < best.squared_distance) best = {lane, i, d2};
    }
  }
  return best;
}

AngleDeg nearest_lane_heading(const Scene& scene, Point2 p) {
  const LanePointRef ref = nearest_lane_point(scene, p);
  return scene.lanes()[ref.lane].headings[ref.point];
}

bool point_in_polygon(const std::vector<Point2>& polygon, Point2 p) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = polygon[j];
    const Point2 b = polygon[i];
    if (OnSegment(a, b, p)) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool in_region(const Scene& scene, Point2 p, RegionKind kind) {
  for (const auto& region : scene.regions()) {
    if (region.kind == kind && point_in_polygon(region.vertices, p)) return true;
  }
  return false;
}

bool IsSimplePolygon(const std::vector<Point2>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = polygon[i];
    const Point2 b = polygon[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip the edge itself and its two neighbours.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (SegmentsTouch(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace offyaw::scene

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

#include "offyaw/synth.hpp"

#include <cmath>
#include <string>

#include "offyaw/error.hpp"

namespace offyaw::scene {
namespace {

using geometry::kDegToRad;

class Jitter {
 public:
  Jitter(double amplitude, std::uint64_t seed) : amplitude_(amplitude), uniform_(seed) {}

  double operator()() {
    if (amplitude_ == 0.0) return 0.0;
    return amplitude_ * (2.0 * uniform_() - 1.0);
  }

 private:
  double amplitude_;
  UniformSource uniform_;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidSpec, what);
}

// Steps of equal length no greater than `spacing` covering `extent`.
std::size_t StepCount(double extent, double spacing) {
  return static_cast<std::size_t>(std::ceil(extent / spacing - 1e-9));
}

LanePolyline StraightLane(std::string id, double x, double y0, double y1,
                          double heading, double spacing, Jitter& jitter,
                          bool reverse = false) {
  LanePolyline lane;
  lane.id = std::move(id);
  const std::size_t steps = StepCount(y1 - y0, spacing);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const double y = reverse ? y1 - t * (y1 - y0) : y0 + t * (y1 - y0);
    lane.points.push_back({x + jitter(), y});
    lane.headings.emplace_back(heading);
  }
  return lane;
}

// Same as StraightLane but running along the x axis at height y.
LanePolyline HorizontalLane(std::string id, double y, double x0, double x1,
                            double heading, double spacing, Jitter& jitter,
                            bool reverse) {
  LanePolyline lane = StraightLane(std::move(id), y, x0, x1, heading, spacing,
                                   jitter, reverse);
  for (Point2& p : lane.points) std::swap(p.x, p.y);
  return lane;
}

Scene MakeStraight(const StraightRoadSpec& road, const SyntheticSpec& spec,
                   Jitter& jitter) {
  Require(!road.headings_deg.empty(), "straight road needs at least one lane");
  Require(road.lane_width > 0.0, "lane width must be > 0");
  Require(road.length > 0.0, "road length must be > 0");
  const double y0 = -road.behind;
  const double y1 = road.length - road.behind;
  std::vector<LanePolyline> lanes;
  for (std::size_t i = 0; i < road.headings_deg.size(); ++i) {
    lanes.push_back(StraightLane("lane_" + std::to_string(i),
                                 static_cast<double>(i) * road.lane_width, y0,
                                 y1, road.headings_deg[i], spec.spacing,
                                 jitter));
  }
  const double half = road.lane_width / 2.0;
  const double x_max =
      static_cast<double>(road.headings_deg.size() - 1) * road.lane_width + half;
  PolygonRegion drivable{{{-half, y0}, {x_max, y0}, {x_max, y1}, {-half, y1}},
                         RegionKind::kDrivable};
  return Scene(std::move(lanes), {drivable},
               spec.ego.value_or(Pose{{0.0, 0.0}, AngleDeg(0.0)}));
}

Scene MakeArc(const ArcRoadSpec& road, const SyntheticSpec& spec,
              Jitter& jitter) {
  Require(road.radius > 0.0, "arc radius must be > 0");
  Require(road.span_deg > 0.0 && road.span_deg <= 360.0,
          "arc span must be in (0, 360]");
  Require(road.lanes >= 1, "arc road needs at least one lane");
  Require(road.lane_width > 0.0, "lane width must be > 0");
  Require(road.radius - road.lane_width / 2.0 > 0.0,
          "arc radius must exceed half a lane width");
  const Point2 centre{road.radius, 0.0};
  const double span = road.span_deg * kDegToRad;
  std::vector<LanePolyline> lanes;
  for (int i = 0; i < road.lanes; ++i) {
    const double r = road.radius + i * road.lane_width;
    LanePolyline lane;
    lane.id = "arc_" + std::to_string(i);
    const std::size_t steps = StepCount(span * r, spec.spacing);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double phi = span * static_cast<double>(k) / static_cast<double>(steps);
      const double rr = r + jitter();
      lane.points.push_back({centre.x - rr * std::cos(phi), rr * std::sin(phi)});
      lane.headings.emplace_back(phi / kDegToRad);
    }
    lanes.push_back(std::move(lane));
  }
  // Annular sector, sampled every degree or so along both rims.
  const double inner = road.radius - road.lane_width / 2.0;
  const double outer =
      road.radius + (road.lanes - 1) * road.lane_width + road.lane_width / 2.0;
  const std::size_t rim_steps = StepCount(road.span_deg, 1.0);
  std::vector<Point2> rim;
  for (std::size_t k = 0; k <= rim_steps; ++k) {
    const double phi = span * static_cast<double>(k) / static_cast<double>(rim_steps);
    rim.push_back({centre.x - outer * std::cos(phi), outer * std::sin(phi)});
  }
  for (std::size_t k = rim_steps + 1; k-- > 0;) {
    const double phi = span * static_cast<double>(k) / static_cast<double>(rim_steps);
    rim.push_back({centre.x - inner * std::cos(phi), inner * std::sin(phi)});
  }
  std::vector<PolygonRegion> regions;
  // A full circle would make the sector self-touching; skip the drivable area.
  if (road.span_deg < 360.0) regions.push_back({rim, RegionKind::kDrivable});
  return Scene(std::move(lanes), std::move(regions),
               spec.ego.value_or(Pose{{0.0, 0.0}, AngleDeg(0.0)}));
}

Scene MakeFourWay(const FourWaySpec& road, const SyntheticSpec& spec,
                  Jitter& jitter) {
  Require(road.leg_length > 0.0, "leg length must be > 0");
  Require(road.lane_width > 0.0, "lane width must be > 0");
  const double w = road.lane_width;
  const double h = w / 2.0;
  const double e = road.leg_length + w;
  std::vector<LanePolyline> lanes;
  lanes.push_back(StraightLane("nb", h, -e, e, 0.0, spec.spacing, jitter));
  lanes.push_back(StraightLane("sb", -h, -e, e, 180.0, spec.spacing, jitter, true));
  lanes.push_back(HorizontalLane("eb", -h, -e, e, 90.0, spec.spacing, jitter, false));
  lanes.push_back(HorizontalLane("wb", h, -e, e, 270.0, spec.spacing, jitter, true));

  PolygonRegion intersection{{{-w, -w}, {w, -w}, {w, w}, {-w, w}},
                             RegionKind::kIntersection};
  PolygonRegion drivable{{{w, -e},
                          {w, -w},
                          {e, -w},
                          {e, w},
                          {w, w},
                          {w, e},
                          {-w, e},
                          {-w, w},
                          {-e, w},
                          {-e, -w},
                          {-w, -w},
                          {-w, -e}},
                         RegionKind::kDrivable};
  return Scene(std::move(lanes), {intersection, drivable},
               spec.ego.value_or(
                   Pose{{h, -road.leg_length / 2.0}, AngleDeg(0.0)}));
}

}  // namespace

Scene synth_scene(const SyntheticSpec& spec, std::uint64_t seed) {
  Require(spec.spacing > 0.0 && spec.spacing <= kDefaultMaxLaneSpacing,
          "lane point spacing must be in (0, 1] m");
  Require(spec.jitter >= 0.0 && spec.jitter <= spec.spacing / 4.0,
          "jitter must be in [0, spacing / 4]");
  Require(std::hypot(spec.spacing, 2.0 * spec.jitter) <= kDefaultMaxLaneSpacing,
          "jitter would push lane point spacing past 1 m");
  Jitter jitter(spec.jitter, seed);
  return std::visit(
      [&](const auto& road) -> Scene {
        using T = std::decay_t<decltype(road)>;
        if constexpr (std::is_same_v<T, StraightRoadSpec>) {
          return MakeStraight(road, spec, jitter);
        } else if constexpr (std::is_same_v<T, ArcRoadSpec>) {
          return MakeArc(road, spec, jitter);
        } else {
          return MakeFourWay(road, spec, jitter);
        }
      },
      spec.road);
}

geometry::Trajectory FollowLanes(const Scene& scene, const Pose& ego, std::size_t steps,
                                 double step_m, double heading_offset_deg, double dt) {
  std::vector<Point2> points{{0.0, 0.0}};
  for (std::size_t k = 0; k < steps; ++k) {
    const Point2 global = geometry::LocalToGlobal(points.back(), ego);
    const double heading = nearest_lane_heading(scene, global).degrees() +
                           heading_offset_deg - ego.heading.degrees();
    const double rad = heading * kDegToRad;
    points.push_back(points.back() + step_m * Point2{std::sin(rad), std::cos(rad)});
  }
  return geometry::Trajectory(std::move(points), dt);
}

geometry::Trajectory RandomWalk(std::uint64_t seed, std::size_t steps, double min_step_m,
                                double max_step_m, double dt) {
  UniformSource uniform(seed);
  std::vector<Point2> points{{0.0, 0.0}};
  for (std::size_t k = 0; k < steps; ++k) {
    const double rad = 2.0 * std::numbers::pi * uniform();
    const double len = min_step_m + (max_step_m - min_step_m) * uniform();
    points.push_back(points.back() + len * Point2{std::sin(rad), std::cos(rad)});
  }
  return geometry::Trajectory(std::move(points), dt);
}

}  // namespace offyaw::scene

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

#include "offyaw/io.hpp"

#include "json_util.hpp"
#include "offyaw/error.hpp"

namespace offyaw::io {
namespace {

using detail::Field;
using detail::json;
using detail::Number;

std::vector<geometry::Point2> PointsFromJson(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kParse, where + ": expected an array of points");
  std::vector<geometry::Point2> points;
  points.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    points.push_back(detail::PointFromJson(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return points;
}

json PointsToJson(const std::vector<geometry::Point2>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(detail::PointToJson(p));
  return out;
}

// Re-labels library errors raised while building objects from a file so the
// message names the offending location.
template <typename Fn>
auto WithContext(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, where + ": " + e.what());
  }
}

geometry::Trajectory TrajectoryFromJson(const json& j, double dt, const std::string& where) {
  return WithContext(where, [&] { return geometry::Trajectory(PointsFromJson(j, where), dt); });
}

const char* KindName(scene::RegionKind kind) {
  return kind == scene::RegionKind::kIntersection ? "intersection" : "drivable";
}

}  // namespace

scene::Scene SceneFromJson(const std::string& text, const std::string& origin) {
  const json j = detail::ParseJson(text, origin);
  std::vector<scene::LanePolyline> lanes;
  const json& lanes_j = Field(j, "lanes", origin);
  if (!lanes_j.is_array()) throw Error(ErrorCode::kParse, origin + ": 'lanes' must be an array");
  for (std::size_t i = 0; i < lanes_j.size(); ++i) {
    const std::string where = origin + ": lanes[" + std::to_string(i) + "]";
    const json& lj = lanes_j[i];
    scene::LanePolyline lane;
    const json& id = Field(lj, "id", where);
    if (!id.is_string()) throw Error(ErrorCode::kParse, where + ".id must be a string");
    lane.id = id.get<std::string>();
    lane.points = PointsFromJson(Field(lj, "points", where), where + ".points");
    const json& headings = Field(lj, "headings_deg", where);
    if (!headings.is_array()) {
      throw Error(ErrorCode::kParse, where + ".headings_deg must be an array");
    }
    for (const json& h : headings) lane.headings.emplace_back(Number(h, where + ".headings_deg"));
    lanes.push_back(std::move(lane));
  }
  std::vector<scene::PolygonRegion> regions;
  if (auto it = j.find("regions"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::kParse, origin + ": 'regions' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = origin + ": regions[" + std::to_string(i) + "]";
      const json& rj = (*it)[i];
      scene::PolygonRegion region;
      const json& kind = Field(rj, "kind", where);
      if (kind == "intersection") {
        region.kind = scene::RegionKind::kIntersection;
      } else if (kind == "drivable") {
        region.kind = scene::RegionKind::kDrivable;
      } else {
        throw Error(ErrorCode::kParse, where + ".kind must be 'intersection' or 'drivable'");
      }
      region.vertices = PointsFromJson(Field(rj, "vertices", where), where + ".vertices");
      regions.push_back(std::move(region));
    }
  }
  const geometry::Pose ego = detail::PoseFromJson(Field(j, "ego", origin), origin + ": ego");
  return WithContext(origin, [&] {
    return scene::Scene(std::move(lanes), std::move(regions), ego);
  });
}

std::string SceneToJson(const scene::Scene& scene) {
  json lanes = json::array();
  for (const auto& lane : scene.lanes()) {
    json headings = json::array();
    for (const auto& h : lane.headings) headings.push_back(h.degrees());
    lanes.push_back(
        {{"id", lane.id}, {"points", PointsToJson(lane.points)}, {"headings_deg", headings}});
  }
  json regions = json::array();
  for (const auto& region : scene.regions()) {
    regions.push_back({{"kind", KindName(region.kind)},
                       {"vertices", PointsToJson(region.vertices)}});
  }
  const json j = {{"lanes", lanes},
                  {"regions", regions},
                  {"ego", detail::PoseToJson(scene.ego())}};
  return j.dump(2) + "\n";
}

scene::Scene LoadScene(const std::filesystem::path& path) {
  return SceneFromJson(detail::ReadFile(path), path.string());
}

void SaveScene(const scene::Scene& scene, const std::filesystem::path& path) {
  detail::WriteFile(path, SceneToJson(scene));
}

std::vector<Sample> SamplesFromJson(const std::string& text, const std::string& origin) {
  const json j = detail::ParseJson(text, origin);
  if (!j.is_array()) throw Error(ErrorCode::kParse, origin + ": expected an array of samples");
  std::vector<Sample> samples;
  for (std::size_t s = 0; s < j.size(); ++s) {
    const std::string where = origin + ": [" + std::to_string(s) + "]";
    const json& sj = j[s];
    Sample sample;
    sample.preds.ego = detail::PoseFromJson(Field(sj, "ego", where), where + ".ego");
    double dt = 0.5;
    if (auto it = sj.find("dt"); it != sj.end()) dt = Number(*it, where + ".dt");
    const json& modes = Field(sj, "modes", where);
    if (!modes.is_array()) throw Error(ErrorCode::kParse, where + ".modes must be an array");
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const std::string mwhere = where + ".modes[" + std::to_string(m) + "]";
      sample.preds.probabilities.push_back(
          Number(Field(modes[m], "probability", mwhere), mwhere + ".probability"));
      sample.preds.trajectories.push_back(
          TrajectoryFromJson(Field(modes[m], "points", mwhere), dt, mwhere + ".points"));
    }
    if (auto it = sj.find("gt"); it != sj.end()) {
      sample.gt = TrajectoryFromJson(*it, dt, where + ".gt");
    }
    WithContext(where, [&] {
      sample.preds.Validate();
      return 0;
    });
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::string SamplesToJson(const std::vector<Sample>& samples) {
  json out = json::array();
  for (const Sample& s : samples) {
    json modes = json::array();
    for (std::size_t m = 0; m < s.preds.modes(); ++m) {
      modes.push_back({{"probability", s.preds.probabilities[m]},
                       {"points", PointsToJson(s.preds.trajectories[m].points())}});
    }
    json sj = {{"ego", detail::PoseToJson(s.preds.ego)},
               {"dt", s.preds.trajectories.front().dt()},
               {"modes", modes}};
    if (s.gt) sj["gt"] = PointsToJson(s.gt->points());
    out.push_back(std::move(sj));
  }
  return out.dump(2) + "\n";
}

std::vector<Sample> LoadSamples(const std::filesystem::path& path) {
  return SamplesFromJson(detail::ReadFile(path), path.string());
}

void SaveSamples(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  detail::WriteFile(path, SamplesToJson(samples));
}

std::vector<geometry::Trajectory> GroundTruthFromJson(const std::string& text, double dt,
                                                      const std::string& origin) {
  const json j = detail::ParseJson(text, origin);
  if (!j.is_array()) throw Error(ErrorCode::kParse, origin + ": expected an array");
  std::vector<geometry::Trajectory> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = origin + ": [" + std::to_string(i) + "]";
    const json& points = j[i].is_object() ? Field(j[i], "points", where) : j[i];
    out.push_back(TrajectoryFromJson(points, dt, where));
  }
  return out;
}

std::string GroundTruthToJson(const std::vector<geometry::Trajectory>& gts) {
  json out = json::array();
  for (const auto& gt : gts) out.push_back({{"points", PointsToJson(gt.points())}});
  return out.dump(2) + "\n";
}

std::string TraceToCsv(const std::vector<std::vector<yawloss::TraceRow>>& traces) {
  std::string out = "sample,step,total,yaw,anchor\n";
  for (std::size_t s = 0; s < traces.size(); ++s) {
    for (const auto& row : traces[s]) {
      out += std::to_string(s) + "," + std::to_string(row.step) + "," +
             detail::FormatDouble(row.total) + "," + detail::FormatDouble(row.yaw) + "," +
             detail::FormatDouble(row.anchor) + "\n";
    }
  }
  return out;
}

}  // namespace offyaw::io

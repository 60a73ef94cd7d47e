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

#include "offyaw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "json_util.hpp"
#include "offyaw/error.hpp"

namespace offyaw::metrics {
namespace {

using detail::json;
using raster::RasterLookup;

void RequireSameShape(const PredictionSet& preds, const Trajectory& gt) {
  const Trajectory& first = preds.trajectories.front();
  if (gt.size() != first.size()) {
    throw Error(ErrorCode::kBatchShapeMismatch,
                "ground truth has " + std::to_string(gt.size()) +
                    " points, predictions have " + std::to_string(first.size()));
  }
  if (std::abs(gt.dt() - first.dt()) > 1e-9) {
    throw Error(ErrorCode::kBatchShapeMismatch,
                "ground truth dt differs from prediction dt");
  }
}

double MeanDisplacement(const Trajectory& pred, const Trajectory& gt) {
  double sum = 0.0;
  for (std::size_t t = 1; t < pred.size(); ++t) {
    sum += geometry::Distance(pred.points()[t], gt.points()[t]);
  }
  return sum / static_cast<double>(pred.size() - 1);
}

double FinalDisplacement(const Trajectory& pred, const Trajectory& gt) {
  return geometry::Distance(pred.points().back(), gt.points().back());
}

double MaxDisplacement(const Trajectory& pred, const Trajectory& gt) {
  double worst = 0.0;
  for (std::size_t t = 1; t < pred.size(); ++t) {
    worst = std::max(worst, geometry::Distance(pred.points()[t], gt.points()[t]));
  }
  return worst;
}

template <typename ErrorFn>
KMetric MinOverTopK(const PredictionSet& preds, const Trajectory& gt, int k,
                    ErrorFn error) {
  preds.Validate();
  RequireSameShape(preds, gt);
  const TopK top = top_k_modes(preds.probabilities, k);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mode : top.modes) {
    best = std::min(best, error(preds.trajectories[mode], gt));
  }
  return {best, top.clamped};
}

Trajectory Truncate(const Trajectory& traj, std::size_t horizon_steps) {
  if (horizon_steps == 0 || traj.size() <= horizon_steps + 1) return traj;
  std::vector<Point2> points(traj.points().begin(),
                             traj.points().begin() +
                                 static_cast<std::ptrdiff_t>(horizon_steps + 1));
  return Trajectory(std::move(points), traj.dt());
}

PredictionSet Truncate(const PredictionSet& preds, std::size_t horizon_steps) {
  PredictionSet out = preds;
  for (Trajectory& t : out.trajectories) t = Truncate(t, horizon_steps);
  return out;
}

}  // namespace

void PredictionSet::Validate() const {
  if (trajectories.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction set has no modes");
  }
  if (probabilities.size() != trajectories.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "prediction set has " + std::to_string(probabilities.size()) +
                    " probabilities for " + std::to_string(trajectories.size()) +
                    " modes");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "mode probabilities must be >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument,
                "mode probabilities sum to " + detail::FormatDouble(total));
  }
  const Trajectory& first = trajectories.front();
  for (const Trajectory& t : trajectories) {
    if (t.size() < 2) {
      throw Error(ErrorCode::kDegenerateTrajectory, "mode has fewer than 2 points");
    }
    if (t.size() != first.size() || std::abs(t.dt() - first.dt()) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "modes must share trajectory length and dt");
    }
  }
}

void EvalConfig::Validate() const {
  if (!(alpha_deg >= 0.0 && alpha_deg < 180.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in [0, 180)");
  }
  if (k_values.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values");
  for (int k : k_values) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k values must be >= 1");
  }
  if (!(miss_threshold_m > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "miss threshold must be > 0");
  }
  if (!(stationary_epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stationary epsilon must be >= 0");
  }
}

std::vector<SegmentTerm> off_yaw_segments(const Trajectory& traj,
                                          const raster::HeadingRaster& raster,
                                          const Pose& ego,
                                          double stationary_epsilon) {
  if (traj.size() < 2) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "off-yaw needs a trajectory of at least 2 points");
  }
  const auto& points = traj.points();
  std::vector<SegmentTerm> terms(traj.segments());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    SegmentTerm& term = terms[i];
    term.midpoint_global =
        geometry::LocalToGlobal(geometry::midpoint(points[i], points[i + 1]), ego);
    const auto local_heading =
        geometry::segment_heading(points[i], points[i + 1], stationary_epsilon);
    if (!local_heading) {
      term.status = SegmentTerm::Status::kStationary;
      continue;
    }
    term.heading_global = geometry::to_global(*local_heading, ego);
    const RasterLookup lookup = raster::query(raster, term.midpoint_global);
    switch (lookup.kind) {
      case RasterLookup::Kind::kOffMap:
        term.status = SegmentTerm::Status::kOffMap;
        break;
      case RasterLookup::Kind::kIntersection:
        term.status = SegmentTerm::Status::kIntersection;
        break;
      case RasterLookup::Kind::kHeading:
        term.status = SegmentTerm::Status::kScored;
        term.lane_heading = lookup.heading;
        term.residual_deg =
            geometry::SignedAngularResidual(term.heading_global, lookup.heading);
        term.delta_deg = geometry::angular_difference(term.heading_global, lookup.heading);
        break;
    }
  }
  return terms;
}

OffYawBreakdown off_yaw_breakdown(const Trajectory& traj,
                                  const raster::HeadingRaster& raster, const Pose& ego,
                                  double alpha_deg, double stationary_epsilon) {
  OffYawBreakdown out;
  const std::vector<SegmentTerm> terms =
      off_yaw_segments(traj, raster, ego, stationary_epsilon);
  for (const SegmentTerm& term : terms) {
    switch (term.status) {
      case SegmentTerm::Status::kStationary:
        ++out.stationary_segments;
        break;
      case SegmentTerm::Status::kOffMap:
        ++out.off_map_midpoints;
        break;
      case SegmentTerm::Status::kIntersection:
        ++out.intersection_midpoints;
        break;
      case SegmentTerm::Status::kScored: {
        const double gated = geometry::clip_threshold(term.delta_deg, alpha_deg);
        if (gated > 0.0) ++out.penalized_segments;
        out.segment_sum_rad += gated * geometry::kDegToRad;
        break;
      }
    }
  }
  out.measure_rad = out.segment_sum_rad / static_cast<double>(terms.size());
  return out;
}

double off_yaw_measure(const Trajectory& traj, const raster::HeadingRaster& raster,
                       const Pose& ego, double alpha_deg) {
  return off_yaw_breakdown(traj, raster, ego, alpha_deg).measure_rad;
}

double off_yaw_sample(const PredictionSet& preds, const raster::HeadingRaster& raster,
                      double alpha_deg) {
  preds.Validate();
  double sum = 0.0;
  for (const Trajectory& traj : preds.trajectories) {
    sum += off_yaw_measure(traj, raster, preds.ego, alpha_deg);
  }
  return sum / static_cast<double>(preds.modes());
}

double off_yaw_rate(std::span<const OffYawInput> samples, double alpha_deg) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyBatch, "off-yaw rate of no samples");
  double sum = 0.0;
  for (const OffYawInput& s : samples) sum += off_yaw_sample(*s.preds, *s.raster, alpha_deg);
  return sum / static_cast<double>(samples.size());
}

TopK top_k_modes(const std::vector<double>& probabilities, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  TopK out;
  out.modes.resize(probabilities.size());
  std::iota(out.modes.begin(), out.modes.end(), std::size_t{0});
  std::stable_sort(out.modes.begin(), out.modes.end(),
                   [&](std::size_t a, std::size_t b) {
                     return probabilities[a] > probabilities[b];
                   });
  const auto kk = static_cast<std::size_t>(k);
  out.clamped = kk > out.modes.size();
  if (!out.clamped) out.modes.resize(kk);
  return out;
}

KMetric min_ade_k(const PredictionSet& preds, const Trajectory& gt, int k) {
  return MinOverTopK(preds, gt, k, MeanDisplacement);
}

KMetric min_fde_k(const PredictionSet& preds, const Trajectory& gt, int k) {
  return MinOverTopK(preds, gt, k, FinalDisplacement);
}

bool is_miss(const PredictionSet& preds, const Trajectory& gt, int k,
             double threshold_m) {
  return MinOverTopK(preds, gt, k, MaxDisplacement).value > threshold_m;
}

double miss_rate_k(std::span<const MissInput> batch, int k, double threshold_m) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "miss rate of no samples");
  std::size_t misses = 0;
  for (const MissInput& s : batch) misses += is_miss(*s.preds, *s.gt, k, threshold_m);
  return static_cast<double>(misses) / static_cast<double>(batch.size());
}

double off_road_rate(const PredictionSet& preds, const scene::Scene& scene) {
  preds.Validate();
  if (!scene.has_region(scene::RegionKind::kDrivable)) {
    throw Error(ErrorCode::kMissingDrivableArea, "scene defines no drivable area");
  }
  std::size_t outside = 0;
  std::size_t total = 0;
  for (const Trajectory& traj : preds.trajectories) {
    for (std::size_t t = 1; t < traj.size(); ++t) {
      const Point2 p = geometry::LocalToGlobal(traj.points()[t], preds.ego);
      outside += !scene::in_region(scene, p, scene::RegionKind::kDrivable);
      ++total;
    }
  }
  return static_cast<double>(outside) / static_cast<double>(total);
}

AggregateMetrics Aggregate(const std::vector<SampleMetrics>& samples,
                           const EvalConfig& config) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyBatch, "no samples to aggregate");
  AggregateMetrics agg;
  const double n = static_cast<double>(samples.size());
  for (int k : config.k_values) {
    double ade = 0.0, fde = 0.0, miss = 0.0;
    for (const SampleMetrics& s : samples) {
      ade += s.min_ade.at(k);
      fde += s.min_fde.at(k);
      miss += s.miss.at(k);
    }
    agg.min_ade[k] = ade / n;
    agg.min_fde[k] = fde / n;
    agg.miss_rate[k] = miss / n;
  }
  double off_road = 0.0, off_yaw = 0.0, events = 0.0;
  for (const SampleMetrics& s : samples) {
    off_road += s.off_road_rate;
    off_yaw += s.off_yaw_rad;
    events += s.off_yaw_event_fraction;
    agg.intersection_midpoints += s.intersection_midpoints;
    agg.off_map_midpoints += s.off_map_midpoints;
    agg.stationary_segments += s.stationary_segments;
  }
  agg.off_road_rate = off_road / n;
  agg.off_yaw_rate_rad = off_yaw / n;
  agg.off_yaw_event_fraction = events / n;
  return agg;
}

EvalReport evaluate_batch(std::span<const PredictionSet> samples,
                          std::span<const Trajectory> gts,
                          std::span<const scene::Scene* const> scenes,
                          std::span<const raster::HeadingRaster* const> rasters,
                          const EvalConfig& config) {
  config.Validate();
  if (gts.size() != samples.size() || scenes.size() != samples.size() ||
      rasters.size() != samples.size()) {
    throw Error(ErrorCode::kBatchShapeMismatch,
                "batch lists differ in length: " + std::to_string(samples.size()) +
                    " predictions, " + std::to_string(gts.size()) + " ground truths, " +
                    std::to_string(scenes.size()) + " scenes, " +
                    std::to_string(rasters.size()) + " rasters");
  }
  if (samples.empty()) throw Error(ErrorCode::kEmptyBatch, "empty evaluation batch");

  auto evaluate_one = [&](std::size_t i) {
    const PredictionSet preds = Truncate(samples[i], config.horizon_steps);
    const Trajectory gt = Truncate(gts[i], config.horizon_steps);
    preds.Validate();
    SampleMetrics m;
    m.index = i;
    for (int k : config.k_values) {
      const KMetric ade = min_ade_k(preds, gt, k);
      m.min_ade[k] = ade.value;
      m.min_fde[k] = min_fde_k(preds, gt, k).value;
      m.miss[k] = is_miss(preds, gt, k, config.miss_threshold_m) ? 1.0 : 0.0;
      m.k_clamped = m.k_clamped || ade.k_clamped;
    }
    m.off_road_rate = off_road_rate(preds, *scenes[i]);

    double measure_sum = 0.0;
    std::size_t modes_with_events = 0;
    for (const Trajectory& traj : preds.trajectories) {
      const OffYawBreakdown b = off_yaw_breakdown(
          traj, *rasters[i], preds.ego, config.alpha_deg, config.stationary_epsilon);
      measure_sum += b.measure_rad;
      m.off_yaw_segment_sums_rad.push_back(b.segment_sum_rad);
      modes_with_events += b.penalized_segments > 0;
      m.intersection_midpoints += b.intersection_midpoints;
      m.off_map_midpoints += b.off_map_midpoints;
      m.stationary_segments += b.stationary_segments;
    }
    const double modes = static_cast<double>(preds.modes());
    m.off_yaw_mode_sum_rad = measure_sum;
    m.off_yaw_rad = measure_sum / modes;
    m.off_yaw_event_fraction = static_cast<double>(modes_with_events) / modes;
    return m;
  };

  // Each worker owns a contiguous block of slots; errors are rethrown for the
  // lowest failing index so the outcome does not depend on scheduling.
  const std::size_t n = samples.size();
  std::vector<SampleMetrics> results(n);
  std::vector<std::exception_ptr> errors(n);
  auto run_block = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        results[i] = evaluate_one(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, n / 8));
  if (workers <= 1) {
    run_block(0, n);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(run_block, n * w / workers, n * (w + 1) / workers);
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvalReport report;
  report.config = config;
  report.samples = std::move(results);
  report.aggregate = Aggregate(report.samples, config);
  return report;
}

namespace {

json KMapToJson(const std::map<int, double>& values) {
  json out = json::object();
  for (const auto& [k, v] : values) out[std::to_string(k)] = v;
  return out;
}

std::map<int, double> KMapFromJson(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": expected an object");
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) {
    out[std::stoi(key)] = detail::Number(value, where + "." + key);
  }
  return out;
}

std::size_t Count(const json& j, const char* key, const std::string& where) {
  const json& v = detail::Field(j, key, where);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::kParse, where + "." + key + ": expected a count");
  }
  return v.get<std::size_t>();
}

double Real(const json& j, const char* key, const std::string& where) {
  return detail::Number(detail::Field(j, key, where), where + "." + key);
}

}  // namespace

std::string ReportToJson(const EvalReport& report) {
  const EvalConfig& c = report.config;
  json config = {{"alpha_deg", c.alpha_deg},
                 {"k_values", c.k_values},
                 {"miss_threshold_m", c.miss_threshold_m},
                 {"horizon_steps", c.horizon_steps},
                 {"stationary_epsilon", c.stationary_epsilon}};
  const AggregateMetrics& a = report.aggregate;
  json aggregate = {{"min_ade", KMapToJson(a.min_ade)},
                    {"min_fde", KMapToJson(a.min_fde)},
                    {"miss_rate", KMapToJson(a.miss_rate)},
                    {"off_road_rate", a.off_road_rate},
                    {"off_yaw_rate_rad", a.off_yaw_rate_rad},
                    {"off_yaw_event_fraction", a.off_yaw_event_fraction},
                    {"intersection_midpoints", a.intersection_midpoints},
                    {"off_map_midpoints", a.off_map_midpoints},
                    {"stationary_segments", a.stationary_segments}};
  json samples = json::array();
  for (const SampleMetrics& s : report.samples) {
    samples.push_back({{"index", s.index},
                       {"min_ade", KMapToJson(s.min_ade)},
                       {"min_fde", KMapToJson(s.min_fde)},
                       {"miss", KMapToJson(s.miss)},
                       {"off_road_rate", s.off_road_rate},
                       {"off_yaw_rad", s.off_yaw_rad},
                       {"off_yaw_event_fraction", s.off_yaw_event_fraction},
                       {"intersection_midpoints", s.intersection_midpoints},
                       {"off_map_midpoints", s.off_map_midpoints},
                       {"stationary_segments", s.stationary_segments},
                       {"k_clamped", s.k_clamped},
                       {"debug",
                        {{"off_yaw_mode_sum_rad", s.off_yaw_mode_sum_rad},
                         {"off_yaw_segment_sums_rad", s.off_yaw_segment_sums_rad}}}});
  }
  const json j = {{"config", config},
                  {"num_samples", report.samples.size()},
                  {"aggregate", aggregate},
                  {"samples", samples}};
  return j.dump(2) + "\n";
}

EvalReport ReportFromJson(const std::string& text) {
  const json j = detail::ParseJson(text, "report");
  EvalReport r;
  const json& c = detail::Field(j, "config", "report");
  r.config.alpha_deg = Real(c, "alpha_deg", "config");
  r.config.k_values.clear();
  for (const json& k : detail::Field(c, "k_values", "config")) r.config.k_values.push_back(k.get<int>());
  r.config.miss_threshold_m = Real(c, "miss_threshold_m", "config");
  r.config.horizon_steps = Count(c, "horizon_steps", "config");
  r.config.stationary_epsilon = Real(c, "stationary_epsilon", "config");

  const json& a = detail::Field(j, "aggregate", "report");
  r.aggregate.min_ade = KMapFromJson(detail::Field(a, "min_ade", "aggregate"), "aggregate.min_ade");
  r.aggregate.min_fde = KMapFromJson(detail::Field(a, "min_fde", "aggregate"), "aggregate.min_fde");
  r.aggregate.miss_rate =
      KMapFromJson(detail::Field(a, "miss_rate", "aggregate"), "aggregate.miss_rate");
  r.aggregate.off_road_rate = Real(a, "off_road_rate", "aggregate");
  r.aggregate.off_yaw_rate_rad = Real(a, "off_yaw_rate_rad", "aggregate");
  r.aggregate.off_yaw_event_fraction = Real(a, "off_yaw_event_fraction", "aggregate");
  r.aggregate.intersection_midpoints = Count(a, "intersection_midpoints", "aggregate");
  r.aggregate.off_map_midpoints = Count(a, "off_map_midpoints", "aggregate");
  r.aggregate.stationary_segments = Count(a, "stationary_segments", "aggregate");

  for (const json& s : detail::Field(j, "samples", "report")) {
    const std::string where = "samples[" + std::to_string(r.samples.size()) + "]";
    SampleMetrics m;
    m.index = Count(s, "index", where);
    m.min_ade = KMapFromJson(detail::Field(s, "min_ade", where), where + ".min_ade");
    m.min_fde = KMapFromJson(detail::Field(s, "min_fde", where), where + ".min_fde");
    m.miss = KMapFromJson(detail::Field(s, "miss", where), where + ".miss");
    m.off_road_rate = Real(s, "off_road_rate", where);
    m.off_yaw_rad = Real(s, "off_yaw_rad", where);
    m.off_yaw_event_fraction = Real(s, "off_yaw_event_fraction", where);
    m.intersection_midpoints = Count(s, "intersection_midpoints", where);
    m.off_map_midpoints = Count(s, "off_map_midpoints", where);
    m.stationary_segments = Count(s, "stationary_segments", where);
    m.k_clamped = detail::Field(s, "k_clamped", where).get<bool>();
    const json& debug = detail::Field(s, "debug", where);
    m.off_yaw_mode_sum_rad = Real(debug, "off_yaw_mode_sum_rad", where + ".debug");
    for (const json& v : detail::Field(debug, "off_yaw_segment_sums_rad", where)) {
      m.off_yaw_segment_sums_rad.push_back(detail::Number(v, where + ".debug"));
    }
    r.samples.push_back(std::move(m));
  }
  return r;
}

std::string ReportToCsv(const EvalReport& report) {
  std::string out = "sample";
  for (const char* name : {"min_ade", "min_fde", "miss"}) {
    for (int k : report.config.k_values) out += std::string(",") + name + "_" + std::to_string(k);
  }
  out +=
      ",off_road_rate,off_yaw_rad,off_yaw_event_fraction,intersection_midpoints,"
      "off_map_midpoints,stationary_segments\n";

  auto row = [&](const std::string& label, const std::map<int, double>& ade,
                 const std::map<int, double>& fde, const std::map<int, double>& miss,
                 double off_road, double off_yaw, double events, std::size_t inter,
                 std::size_t off_map, std::size_t stationary) {
    out += label;
    for (const auto* values : {&ade, &fde, &miss}) {
      for (int k : report.config.k_values) out += "," + detail::FormatDouble(values->at(k));
    }
    out += "," + detail::FormatDouble(off_road) + "," + detail::FormatDouble(off_yaw) + "," +
           detail::FormatDouble(events) + "," + std::to_string(inter) + "," +
           std::to_string(off_map) + "," + std::to_string(stationary) + "\n";
  };
  for (const SampleMetrics& s : report.samples) {
    row(std::to_string(s.index), s.min_ade, s.min_fde, s.miss, s.off_road_rate,
        s.off_yaw_rad, s.off_yaw_event_fraction, s.intersection_midpoints,
        s.off_map_midpoints, s.stationary_segments);
  }
  const AggregateMetrics& a = report.aggregate;
  row("aggregate", a.min_ade, a.min_fde, a.miss_rate, a.off_road_rate, a.off_yaw_rate_rad,
      a.off_yaw_event_fraction, a.intersection_midpoints, a.off_map_midpoints,
      a.stationary_segments);
  return out;
}

}  // namespace offyaw::metrics

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

// Multimodal trajectory-prediction metrics: the off-yaw measure and rate,
// off-road rate, minADE_k, minFDE_k and miss rate, plus batch evaluation and
// the report formats.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "offyaw/geometry.hpp"
#include "offyaw/heading_raster.hpp"
#include "offyaw/scene.hpp"

namespace offyaw::metrics {

using geometry::AngleDeg;
using geometry::Point2;
using geometry::Pose;
using geometry::Trajectory;

struct PredictionSet {
  std::vector<Trajectory> trajectories;
  std::vector<double> probabilities;
  Pose ego;

  std::size_t modes() const { return trajectories.size(); }
  // Throws kInvalidArgument: m >= 1, one probability per mode, probabilities
  // non-negative summing to 1 within 1e-6, shared length and dt.
  void Validate() const;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct EvalConfig {
  double alpha_deg = 45.0;
  std::vector<int> k_values = {1, 5, 10};
  double miss_threshold_m = 2.0;
  // Trajectories longer than horizon_steps + 1 points are truncated; 0
  // disables truncation.
  std::size_t horizon_steps = 12;
  double stationary_epsilon = geometry::kDefaultStationaryEpsilon;

  void Validate() const;

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

// One trajectory segment as seen by the off-yaw measure.
struct SegmentTerm {
  enum class Status { kScored, kIntersection, kOffMap, kStationary };
  Status status = Status::kStationary;
  Point2 midpoint_global;
  AngleDeg heading_global;  // unset for stationary segments
  AngleDeg lane_heading;    // set only when scored
  // Wrapped heading - lane_heading in (-180, 180]; 0 unless scored.
  double residual_deg = 0.0;
  // |residual_deg| before gating.
  double delta_deg = 0.0;
};

// Per-segment midpoint, heading and raster lookup, without gating.
std::vector<SegmentTerm> off_yaw_segments(
    const Trajectory& traj, const raster::HeadingRaster& raster, const Pose& ego,
    double stationary_epsilon = geometry::kDefaultStationaryEpsilon);

struct OffYawBreakdown {
  double measure_rad = 0.0;      // mean over segments
  double segment_sum_rad = 0.0;  // unnormalised sum over segments
  std::size_t intersection_midpoints = 0;
  std::size_t off_map_midpoints = 0;
  std::size_t stationary_segments = 0;
  std::size_t penalized_segments = 0;
};

// Throws kDegenerateTrajectory for fewer than two points.
OffYawBreakdown off_yaw_breakdown(
    const Trajectory& traj, const raster::HeadingRaster& raster, const Pose& ego,
    double alpha_deg, double stationary_epsilon = geometry::kDefaultStationaryEpsilon);

double off_yaw_measure(const Trajectory& traj, const raster::HeadingRaster& raster,
                       const Pose& ego, double alpha_deg = 45.0);

// Mean over modes of off_yaw_measure.
double off_yaw_sample(const PredictionSet& preds, const raster::HeadingRaster& raster,
                      double alpha_deg = 45.0);

struct OffYawInput {
  const PredictionSet* preds;
  const raster::HeadingRaster* raster;
};

// Mean over samples of off_yaw_sample; throws kEmptyBatch when empty.
double off_yaw_rate(std::span<const OffYawInput> samples, double alpha_deg = 45.0);

struct TopK {
  std::vector<std::size_t> modes;  // most probable first
  bool clamped = false;            // k exceeded the number of modes
};

// Ties on probability go to the lower mode index.
TopK top_k_modes(const std::vector<double>& probabilities, int k);

struct KMetric {
  double value = 0.0;
  bool k_clamped = false;
};

// Distances skip step 0, the shared current position.
KMetric min_ade_k(const PredictionSet& preds, const Trajectory& gt, int k);
KMetric min_fde_k(const PredictionSet& preds, const Trajectory& gt, int k);

// A sample is a miss when every top-k mode strays beyond `threshold_m` of
// the ground truth at some step.
bool is_miss(const PredictionSet& preds, const Trajectory& gt, int k,
             double threshold_m = 2.0);

struct MissInput {
  const PredictionSet* preds;
  const Trajectory* gt;
};

double miss_rate_k(std::span<const MissInput> batch, int k, double threshold_m = 2.0);

// Fraction of predicted points (all modes, steps 1..n) outside every drivable
// polygon. Throws kMissingDrivableArea when the scene has none.
double off_road_rate(const PredictionSet& preds, const scene::Scene& scene);

struct SampleMetrics {
  std::size_t index = 0;
  std::map<int, double> min_ade;
  std::map<int, double> min_fde;
  std::map<int, double> miss;  // 1 for a miss, 0 for a hit
  double off_road_rate = 0.0;
  double off_yaw_rad = 0.0;
  // Fraction of modes with at least one penalised segment.
  double off_yaw_event_fraction = 0.0;
  // Debug: sum over modes of the per-mode measure, and per-mode sums over
  // segments, both without normalisation.
  double off_yaw_mode_sum_rad = 0.0;
  std::vector<double> off_yaw_segment_sums_rad;
  std::size_t intersection_midpoints = 0;
  std::size_t off_map_midpoints = 0;
  std::size_t stationary_segments = 0;
  bool k_clamped = false;

  friend bool operator==(const SampleMetrics&, const SampleMetrics&) = default;
};

struct AggregateMetrics {
  std::map<int, double> min_ade;
  std::map<int, double> min_fde;
  std::map<int, double> miss_rate;
  double off_road_rate = 0.0;
  double off_yaw_rate_rad = 0.0;
  double off_yaw_event_fraction = 0.0;
  // Totals, not means.
  std::size_t intersection_midpoints = 0;
  std::size_t off_map_midpoints = 0;
  std::size_t stationary_segments = 0;

  friend bool operator==(const AggregateMetrics&, const AggregateMetrics&) = default;
};

struct EvalReport {
  EvalConfig config;
  std::vector<SampleMetrics> samples;
  AggregateMetrics aggregate;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Aggregates are means over `samples` in index order.
AggregateMetrics Aggregate(const std::vector<SampleMetrics>& samples,
                           const EvalConfig& config);

// All four lists must have the same length (kBatchShapeMismatch otherwise)
// and be non-empty (kEmptyBatch).
EvalReport evaluate_batch(std::span<const PredictionSet> samples,
                          std::span<const Trajectory> gts,
                          std::span<const scene::Scene* const> scenes,
                          std::span<const raster::HeadingRaster* const> rasters,
                          const EvalConfig& config);

// Report formats. JSON parses back into an equal EvalReport.
std::string ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const std::string& text);
std::string ReportToCsv(const EvalReport& report);

}  // namespace offyaw::metrics

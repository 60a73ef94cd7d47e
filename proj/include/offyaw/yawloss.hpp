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

// YawLoss: the off-yaw measure used as a differentiable loss over every mode
// of a prediction set, its analytic gradient, a finite-difference checker
// and a line-searched gradient-descent refiner.
//
// Gradients flow only through the predicted segment headings. The raster
// heading field and the intersection mask are piecewise constant in
// position and are treated as constants.

#include <cstddef>
#include <vector>

#include "offyaw/heading_raster.hpp"
#include "offyaw/metrics.hpp"

namespace offyaw::yawloss {

using geometry::Point2;
using metrics::PredictionSet;

struct LossConfig {
  double alpha_deg = 45.0;
  double scale = 1.0;
  // 0 is the hard gate. A positive width ramps the gate multiplier linearly
  // from 0 at alpha to 1 at alpha + width.
  double smooth_gate_width_deg = 0.0;
  double stationary_epsilon = geometry::kDefaultStationaryEpsilon;

  void Validate() const;
};

struct GateValue {
  double value_deg = 0.0;
  double slope = 0.0;  // d value / d delta
};

GateValue ApplyGate(double delta_deg, double alpha_deg, double width_deg);

// Per-point dL/dx, dL/dy in the agent-local frame. Entry 0 is always zero.
struct TrajectoryGradient {
  std::vector<Point2> per_point;

  friend bool operator==(const TrajectoryGradient&, const TrajectoryGradient&) = default;
};

// scale * mean over modes of the mean gated deviation (radians). With the hard
// gate and scale 1 this is bit-identical to metrics::off_yaw_sample.
double yaw_loss(const PredictionSet& preds, const raster::HeadingRaster& raster,
                const LossConfig& cfg);

std::vector<TrajectoryGradient> yaw_loss_grad(const PredictionSet& preds,
                                              const raster::HeadingRaster& raster,
                                              const LossConfig& cfg);

struct GradCheckOptions {
  double h = 1e-4;
  double tolerance = 1e-4;  // relative
  // Exclusion bands around the non-smooth set of the loss.
  double gate_band_deg = 0.5;
  double antipodal_band_deg = 0.5;
  double cell_edge_band_m = 1e-3;
  double min_segment_m = 1e-3;
  // Analytic and numeric both below this are agreeing zeros; rounding in the
  // central difference alone is around eps * loss / h ~ 1e-11.
  double zero_floor = 1e-9;
};

struct GradCheckEntry {
  std::size_t mode = 0;
  std::size_t point = 0;
  int axis = 0;  // 0 = x, 1 = y
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  bool excluded = false;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  std::size_t checked = 0;  // non-excluded coordinates
  std::size_t passed = 0;
  std::size_t excluded = 0;
  std::size_t excluded_gate = 0;
  std::size_t excluded_antipodal = 0;
  std::size_t excluded_cell_edge = 0;
  std::size_t excluded_short_segment = 0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;

  bool ok() const { return passed == checked; }
};

// Central differences (L(x+h) - L(x-h)) / 2h for every coordinate of points
// 1..n of every mode, compared to yaw_loss_grad.
GradCheckReport grad_check(const PredictionSet& preds,
                           const raster::HeadingRaster& raster, const LossConfig& cfg,
                           const GradCheckOptions& options = {});

struct RefineOptions {
  double anchor_weight = 0.0;
  int steps = 500;
  double lr = 0.1;
  bool line_search = true;
  int max_halvings = 20;
  // After an accepted step the next trial step is multiplied by this factor,
  // up to lr * max_step_ratio.
  double step_growth = 2.0;
  double max_step_ratio = 1024.0;
  // Descend on the step vectors between consecutive points rather than on the
  // points. Same objective; removes the cancellation between the two segments
  // sharing an interior point.
  bool increment_space = true;
};

struct TraceRow {
  int step = 0;
  double total = 0.0;
  double yaw = 0.0;
  double anchor = 0.0;
};

struct RefineResult {
  PredictionSet refined;
  // Row 0 is the starting point, then one row per accepted step.
  std::vector<TraceRow> trace;
  bool converged = false;  // stopped early on a zero gradient or a failed line search
};

// Minimises yaw_loss + anchor_weight * mean squared displacement from the
// input trajectories, holding point 0 of every mode fixed. Throws
// kDivergedRefinement if the objective becomes non-finite.
RefineResult refine(const PredictionSet& preds, const raster::HeadingRaster& raster,
                    const LossConfig& cfg, const RefineOptions& options = {});

}  // namespace offyaw::yawloss

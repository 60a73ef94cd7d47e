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

#include "offyaw/yawloss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "offyaw/error.hpp"

namespace offyaw::yawloss {
namespace {

using metrics::SegmentTerm;

double ResidualSign(double residual_deg) {
  // At exactly 180 degrees both rotation directions reduce the deviation.
  if (residual_deg == 0.0 || residual_deg == 180.0) return 0.0;
  return residual_deg > 0.0 ? 1.0 : -1.0;
}

double SquaredNorm(const std::vector<TrajectoryGradient>& grads) {
  double s = 0.0;
  for (const auto& g : grads) {
    for (const Point2& p : g.per_point) s += p.x * p.x + p.y * p.y;
  }
  return s;
}

struct Objective {
  double total = 0.0;
  double yaw = 0.0;
  double anchor = 0.0;
};

double MeanSquaredDisplacement(const PredictionSet& current, const PredictionSet& initial) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < current.modes(); ++j) {
    const auto& p = current.trajectories[j].points();
    const auto& p0 = initial.trajectories[j].points();
    for (std::size_t i = 1; i < p.size(); ++i) {
      sum += geometry::SquaredDistance(p[i], p0[i]);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

Objective Evaluate(const PredictionSet& current, const PredictionSet& initial,
                   const raster::HeadingRaster& raster, const LossConfig& cfg,
                   double anchor_weight) {
  Objective o;
  o.yaw = yaw_loss(current, raster, cfg);
  o.anchor = anchor_weight == 0.0
                 ? 0.0
                 : anchor_weight * MeanSquaredDisplacement(current, initial);
  o.total = o.yaw + o.anchor;
  return o;
}

std::vector<TrajectoryGradient> ObjectiveGradient(const PredictionSet& current,
                                                  const PredictionSet& initial,
                                                  const raster::HeadingRaster& raster,
                                                  const LossConfig& cfg,
                                                  double anchor_weight) {
  std::vector<TrajectoryGradient> grads = yaw_loss_grad(current, raster, cfg);
  if (anchor_weight == 0.0) return grads;
  const std::size_t n = current.trajectories.front().segments();
  const double w = 2.0 * anchor_weight / static_cast<double>(current.modes() * n);
  for (std::size_t j = 0; j < current.modes(); ++j) {
    const auto& p = current.trajectories[j].points();
    const auto& p0 = initial.trajectories[j].points();
    for (std::size_t i = 1; i < p.size(); ++i) {
      grads[j].per_point[i] = grads[j].per_point[i] + w * (p[i] - p0[i]);
    }
  }
  return grads;
}

PredictionSet Step(const PredictionSet& current,
                   const std::vector<TrajectoryGradient>& grads, double t) {
  PredictionSet next = current;
  for (std::size_t j = 0; j < next.modes(); ++j) {
    auto& points = next.trajectories[j].mutable_points();
    for (std::size_t i = 1; i < points.size(); ++i) {
      points[i] = points[i] - t * grads[j].per_point[i];
    }
  }
  return next;
}

// Descent direction for the points when the trajectory is parameterised by its
// step vectors d_i = p_{i+1} - p_i. dL/dd_i is the suffix sum of the point
// gradients, and moving every d_i moves p_k by the prefix sum of those.
std::vector<TrajectoryGradient> IncrementDirection(const std::vector<TrajectoryGradient>& grads) {
  std::vector<TrajectoryGradient> out = grads;
  for (auto& g : out) {
    auto& v = g.per_point;
    const std::size_t n = v.size();
    std::vector<Point2> suffix(n);
    for (std::size_t i = n - 1; i-- > 0;) suffix[i] = suffix[i + 1] + v[i + 1];
    Point2 prefix{};
    v[0] = Point2{};
    for (std::size_t k = 1; k < n; ++k) {
      prefix = prefix + suffix[k - 1];
      v[k] = prefix;
    }
  }
  return out;
}

double DistanceToGridLine(double coord, double resolution) {
  const double frac = coord - resolution * std::floor(coord / resolution);
  return std::min(frac, resolution - frac);
}

}  // namespace

void LossConfig::Validate() const {
  if (!(alpha_deg >= 0.0 && alpha_deg < 180.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in [0, 180)");
  }
  if (!(scale >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale must be >= 0");
  if (!(smooth_gate_width_deg >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gate width must be >= 0");
  }
}

GateValue ApplyGate(double delta_deg, double alpha_deg, double width_deg) {
  if (width_deg == 0.0) {
    return {geometry::clip_threshold(delta_deg, alpha_deg),
            delta_deg > alpha_deg ? 1.0 : 0.0};
  }
  if (delta_deg <= alpha_deg) return {0.0, 0.0};
  if (delta_deg < alpha_deg + width_deg) {
    return {delta_deg * (delta_deg - alpha_deg) / width_deg,
            (2.0 * delta_deg - alpha_deg) / width_deg};
  }
  return {delta_deg, 1.0};
}

double yaw_loss(const PredictionSet& preds, const raster::HeadingRaster& raster,
                const LossConfig& cfg) {
  cfg.Validate();
  preds.Validate();
  double modes_sum = 0.0;
  for (const auto& traj : preds.trajectories) {
    const std::vector<SegmentTerm> terms =
        metrics::off_yaw_segments(traj, raster, preds.ego, cfg.stationary_epsilon);
    double sum = 0.0;
    for (const SegmentTerm& term : terms) {
      if (term.status != SegmentTerm::Status::kScored) continue;
      sum += ApplyGate(term.delta_deg, cfg.alpha_deg, cfg.smooth_gate_width_deg).value_deg *
             geometry::kDegToRad;
    }
    modes_sum += sum / static_cast<double>(terms.size());
  }
  return cfg.scale * (modes_sum / static_cast<double>(preds.modes()));
}

std::vector<TrajectoryGradient> yaw_loss_grad(const PredictionSet& preds,
                                              const raster::HeadingRaster& raster,
                                              const LossConfig& cfg) {
  cfg.Validate();
  preds.Validate();
  std::vector<TrajectoryGradient> grads;
  grads.reserve(preds.modes());
  for (const auto& traj : preds.trajectories) {
    const auto& points = traj.points();
    TrajectoryGradient g;
    g.per_point.assign(points.size(), Point2{});
    const std::vector<SegmentTerm> terms =
        metrics::off_yaw_segments(traj, raster, preds.ego, cfg.stationary_epsilon);
    const double weight = cfg.scale / static_cast<double>(preds.modes() * terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const SegmentTerm& term = terms[i];
      if (term.status != SegmentTerm::Status::kScored) continue;
      const GateValue gate =
          ApplyGate(term.delta_deg, cfg.alpha_deg, cfg.smooth_gate_width_deg);
      const double w = weight * gate.slope * ResidualSign(term.residual_deg);
      if (w == 0.0) continue;
      // d atan2(dx, dy) / d(dx, dy) = (dy, -dx) / (dx^2 + dy^2).
      const double dx = points[i + 1].x - points[i].x;
      const double dy = points[i + 1].y - points[i].y;
      const double len2 = dx * dx + dy * dy;
      const Point2 d_heading{dy / len2, -dx / len2};
      g.per_point[i + 1] = g.per_point[i + 1] + w * d_heading;
      g.per_point[i] = g.per_point[i] - w * d_heading;
    }
    g.per_point[0] = Point2{};
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport grad_check(const PredictionSet& preds,
                           const raster::HeadingRaster& raster, const LossConfig& cfg,
                           const GradCheckOptions& options) {
  if (!(options.h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "h must be > 0");
  const std::vector<TrajectoryGradient> analytic = yaw_loss_grad(preds, raster, cfg);
  const double resolution = raster.spec().resolution;
  const geometry::Pose raster_rotation{{0.0, 0.0}, raster.spec().origin_pose.heading};
  const geometry::Pose ego_rotation{{0.0, 0.0}, preds.ego.heading};

  GradCheckReport report;
  PredictionSet work = preds;
  for (std::size_t j = 0; j < preds.modes(); ++j) {
    const auto& points = preds.trajectories[j].points();
    const std::vector<SegmentTerm> terms =
        metrics::off_yaw_segments(preds.trajectories[j], raster, preds.ego,
                                  cfg.stationary_epsilon);
    for (std::size_t i = 1; i < points.size(); ++i) {
      for (int axis = 0; axis < 2; ++axis) {
        GradCheckEntry e;
        e.mode = j;
        e.point = i;
        e.axis = axis;
        e.analytic = axis == 0 ? analytic[j].per_point[i].x : analytic[j].per_point[i].y;

        // Direction the adjacent midpoints move in raster coordinates.
        const Point2 local_dir = axis == 0 ? Point2{1.0, 0.0} : Point2{0.0, 1.0};
        const Point2 raster_dir = geometry::GlobalToLocal(
            geometry::LocalToGlobal(local_dir, ego_rotation), raster_rotation);

        bool gate = false, antipodal = false, edge = false, short_segment = false;
        for (std::size_t s = i - 1; s <= i && s < terms.size(); ++s) {
          const SegmentTerm& term = terms[s];
          if (geometry::Distance(points[s], points[s + 1]) < options.min_segment_m) {
            short_segment = true;
          }
          if (term.status == SegmentTerm::Status::kScored) {
            const double d = term.delta_deg;
            if (std::abs(d - cfg.alpha_deg) < options.gate_band_deg ||
                (cfg.smooth_gate_width_deg > 0.0 &&
                 std::abs(d - cfg.alpha_deg - cfg.smooth_gate_width_deg) <
                     options.gate_band_deg)) {
              gate = true;
            }
            if (d > 180.0 - options.antipodal_band_deg) antipodal = true;
          }
          if (term.status != SegmentTerm::Status::kStationary) {
            const raster::RasterCoords c = raster.coords(term.midpoint_global);
            if ((std::abs(raster_dir.x) > 1e-12 &&
                 DistanceToGridLine(c.u, resolution) < options.cell_edge_band_m) ||
                (std::abs(raster_dir.y) > 1e-12 &&
                 DistanceToGridLine(c.v, resolution) < options.cell_edge_band_m)) {
              edge = true;
            }
          }
        }

        auto& coord = axis == 0 ? work.trajectories[j].mutable_points()[i].x
                                : work.trajectories[j].mutable_points()[i].y;
        const double original = coord;
        coord = original + options.h;
        const double plus = yaw_loss(work, raster, cfg);
        coord = original - options.h;
        const double minus = yaw_loss(work, raster, cfg);
        coord = original;
        e.numeric = (plus - minus) / (2.0 * options.h);
        e.abs_error = std::abs(e.analytic - e.numeric);
        const double denom = std::max(std::abs(e.analytic), std::abs(e.numeric));
        e.rel_error = denom > 0.0 ? e.abs_error / denom : 0.0;

        e.excluded = gate || antipodal || edge || short_segment;
        if (e.excluded) {
          ++report.excluded;
          report.excluded_gate += gate;
          report.excluded_antipodal += antipodal;
          report.excluded_cell_edge += edge;
          report.excluded_short_segment += short_segment;
        } else {
          ++report.checked;
          const bool zero = denom < options.zero_floor;
          e.passed = zero || e.rel_error <= options.tolerance;
          report.passed += e.passed;
          report.max_abs_error = std::max(report.max_abs_error, e.abs_error);
          if (!zero) report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
        }
        report.entries.push_back(e);
      }
    }
  }
  return report;
}

RefineResult refine(const PredictionSet& preds, const raster::HeadingRaster& raster,
                    const LossConfig& cfg, const RefineOptions& options) {
  if (options.steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (!(options.lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be > 0");
  if (!(options.anchor_weight >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "anchor weight must be >= 0");
  }
  preds.Validate();

  RefineResult result;
  PredictionSet current = preds;
  Objective f = Evaluate(current, preds, raster, cfg, options.anchor_weight);
  result.trace.push_back({0, f.total, f.yaw, f.anchor});
  double trial = options.lr;
  const double max_step = options.lr * std::max(1.0, options.max_step_ratio);

  for (int step = 1; step <= options.steps; ++step) {
    const std::vector<TrajectoryGradient> g =
        ObjectiveGradient(current, preds, raster, cfg, options.anchor_weight);
    if (SquaredNorm(g) == 0.0) {
      result.converged = true;
      break;
    }
    const std::vector<TrajectoryGradient> direction =
        options.increment_space ? IncrementDirection(g) : g;
    bool accepted = false;
    double t = options.line_search ? trial : options.lr;
    for (int halving = 0; halving <= options.max_halvings; ++halving, t /= 2.0) {
      PredictionSet candidate = Step(current, direction, t);
      for (const auto& traj : candidate.trajectories) {
        for (const Point2& p : traj.points()) {
          if (!geometry::IsFinite(p)) {
            throw Error(ErrorCode::kDivergedRefinement,
                        "non-finite trajectory at step " + std::to_string(step));
          }
        }
      }
      const Objective fc = Evaluate(candidate, preds, raster, cfg, options.anchor_weight);
      if (!std::isfinite(fc.total)) {
        throw Error(ErrorCode::kDivergedRefinement,
                    "non-finite loss at step " + std::to_string(step));
      }
      if (!options.line_search || fc.total <= f.total) {
        current = std::move(candidate);
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    result.trace.push_back({step, f.total, f.yaw, f.anchor});
    trial = std::min(t * options.step_growth, max_step);
  }
  result.refined = std::move(current);
  return result;
}

}  // namespace offyaw::yawloss

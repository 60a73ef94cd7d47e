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

// Planar primitives shared by every other module.
//
// Frame conventions: in the agent-local frame +y points forward and +x to the
// right. Headings are measured clockwise from +y, in degrees, so 0 is straight
// ahead and 90 is to the right. The global frame uses the same convention, and
// a pose's heading is the global yaw of the local +y axis.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace offyaw::geometry {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kDefaultStationaryEpsilon = 1e-6;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double SquaredDistance(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double Distance(Point2 a, Point2 b) {
  return std::sqrt(SquaredDistance(a, b));
}

inline bool IsFinite(Point2 p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

// Maps any finite angle in degrees into [0, 360).
double NormalizeDegrees(double degrees);

// A heading in degrees, always held in [0, 360).
class AngleDeg {
 public:
  constexpr AngleDeg() = default;
  explicit AngleDeg(double degrees) : value_(NormalizeDegrees(degrees)) {}

  double degrees() const { return value_; }
  double radians() const { return value_ * kDegToRad; }

  friend bool operator==(const AngleDeg&, const AngleDeg&) = default;

 private:
  double value_ = 0.0;
};

struct Pose {
  Point2 position;
  AngleDeg heading;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// Ordered points in the agent-local frame; points[0] is the current position.
class Trajectory {
 public:
  Trajectory() = default;
  // Throws kDegenerateTrajectory for fewer than two points and
  // kInvalidArgument for non-finite points or dt <= 0.
  Trajectory(std::vector<Point2> points, double dt);

  const std::vector<Point2>& points() const { return points_; }
  std::vector<Point2>& mutable_points() { return points_; }
  double dt() const { return dt_; }
  std::size_t size() const { return points_.size(); }
  // Number of segments, n.
  std::size_t segments() const { return points_.empty() ? 0 : points_.size() - 1; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<Point2> points_;
  double dt_ = 0.5;
};

Point2 midpoint(Point2 a, Point2 b);

// Heading of the step a -> b, clockwise from +y, via atan2(dx, dy).
// Returns nullopt when the step is shorter than `stationary_epsilon`.
std::optional<AngleDeg> segment_heading(
    Point2 a, Point2 b, double stationary_epsilon = kDefaultStationaryEpsilon);

AngleDeg to_global(AngleDeg theta_local, const Pose& pose);

// Rigid transforms between an agent-local frame and the global frame.
Point2 LocalToGlobal(Point2 local, const Pose& pose);
Point2 GlobalToLocal(Point2 global, const Pose& pose);

// Wrapped difference theta - reference in (-180, 180].
double SignedAngularResidual(AngleDeg theta, AngleDeg reference);

// Smallest absolute circular difference, in [0, 180].
double angular_difference(AngleDeg theta, AngleDeg theta_nl);

// Hard gate: deviations up to and including alpha are dropped, larger ones
// pass through unchanged.
inline double clip_threshold(double delta, double alpha) {
  return delta <= alpha ? 0.0 : delta;
}

}  // namespace offyaw::geometry

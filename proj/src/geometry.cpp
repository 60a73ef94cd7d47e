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

#include "offyaw/geometry.hpp"

#include <string>

#include "offyaw/error.hpp"

namespace offyaw {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kEmptyScene:
      return "EmptyScene";
    case ErrorCode::kInvalidSpec:
      return "InvalidSpec";
    case ErrorCode::kInvalidScene:
      return "InvalidScene";
    case ErrorCode::kIntersectionSentinel:
      return "IntersectionSentinel";
    case ErrorCode::kDegenerateTrajectory:
      return "DegenerateTrajectory";
    case ErrorCode::kEmptyBatch:
      return "EmptyBatch";
    case ErrorCode::kMissingDrivableArea:
      return "MissingDrivableArea";
    case ErrorCode::kBatchShapeMismatch:
      return "BatchShapeMismatch";
    case ErrorCode::kDivergedRefinement:
      return "DivergedRefinement";
    case ErrorCode::kParse:
      return "ParseError";
    case ErrorCode::kIo:
      return "IoError";
  }
  return "Unknown";
}

namespace geometry {
namespace {

struct SinCos {
  double sin;
  double cos;
};

// Exact for multiples of 90 degrees so axis-aligned poses introduce no
// rounding in frame transforms.
SinCos SinCosDeg(double degrees) {
  const double quarter = degrees / 90.0;
  if (quarter == std::floor(quarter)) {
    switch (static_cast<int>(std::fmod(quarter, 4.0))) {
      case 0:
        return {0.0, 1.0};
      case 1:
        return {1.0, 0.0};
      case 2:
        return {0.0, -1.0};
      case 3:
        return {-1.0, 0.0};
    }
  }
  const double rad = degrees * kDegToRad;
  return {std::sin(rad), std::cos(rad)};
}

}  // namespace

double NormalizeDegrees(double degrees) {
  double r = std::fmod(degrees, 360.0);
  if (r < 0.0) r += 360.0;
  // fmod of a tiny negative value plus 360 can round up to exactly 360.
  if (r >= 360.0) r = 0.0;
  return r;
}

Trajectory::Trajectory(std::vector<Point2> points, double dt)
    : points_(std::move(points)), dt_(dt) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "trajectory needs at least 2 points, got " +
                    std::to_string(points_.size()));
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory dt must be > 0");
  }
  for (const Point2& p : points_) {
    if (!IsFinite(p)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite trajectory point");
    }
  }
  if (std::abs(points_[0].x) > 1e-9 || std::abs(points_[0].y) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "trajectory must start at the local origin");
  }
}

Point2 midpoint(Point2 a, Point2 b) {
  return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
}

std::optional<AngleDeg> segment_heading(Point2 a, Point2 b,
                                        double stationary_epsilon) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  if (std::hypot(dx, dy) < stationary_epsilon) return std::nullopt;
  return AngleDeg(std::atan2(dx, dy) * kRadToDeg);
}

AngleDeg to_global(AngleDeg theta_local, const Pose& pose) {
  return AngleDeg(theta_local.degrees() + pose.heading.degrees());
}

Point2 LocalToGlobal(Point2 local, const Pose& pose) {
  const SinCos r = SinCosDeg(pose.heading.degrees());
  return {pose.position.x + local.x * r.cos + local.y * r.sin,
          pose.position.y - local.x * r.sin + local.y * r.cos};
}

Point2 GlobalToLocal(Point2 global, const Pose& pose) {
  const SinCos r = SinCosDeg(pose.heading.degrees());
  const double dx = global.x - pose.position.x;
  const double dy = global.y - pose.position.y;
  return {dx * r.cos - dy * r.sin, dx * r.sin + dy * r.cos};
}

double SignedAngularResidual(AngleDeg theta, AngleDeg reference) {
  // Both inputs are in [0, 360), so the difference needs at most one wrap and
  // swapping the arguments negates it exactly.
  const double r = theta.degrees() - reference.degrees();
  if (r > 180.0) return r - 360.0;
  if (r <= -180.0) return r + 360.0;
  return r;
}

double angular_difference(AngleDeg theta, AngleDeg theta_nl) {
  return std::abs(SignedAngularResidual(theta, theta_nl));
}

}  // namespace geometry
}  // namespace offyaw

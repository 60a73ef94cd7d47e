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

// Deterministic synthetic road scenes used by the tests, the acceptance suite
// and the `synth` CLI subcommand.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "offyaw/scene.hpp"

namespace offyaw::scene {

// Parallel lanes along the global y axis; lane i sits at x = i * lane_width.
struct StraightRoadSpec {
  std::vector<double> headings_deg = {0.0};
  double lane_width = 3.5;
  double length = 200.0;
  // Distance the road extends behind the global origin.
  double behind = 100.0;
};

// Right-hand (clockwise) arc leaving the origin heading 0, centre at (radius, 0).
// Further lanes are concentric at radius + i * lane_width.
struct ArcRoadSpec {
  double radius = 20.0;
  double span_deg = 90.0;
  int lanes = 1;
  double lane_width = 3.5;
};

// Two crossing two-way roads centred on the origin. Lane ids: "nb" (x = +w/2,
// heading 0), "sb" (x = -w/2, heading 180), "eb" (y = -w/2, heading 90),
// "wb" (y = +w/2, heading 270). The intersection is the square |x|,|y| <= w.
struct FourWaySpec {
  double leg_length = 50.0;
  double lane_width = 3.5;
};

struct SyntheticSpec {
  std::variant<StraightRoadSpec, ArcRoadSpec, FourWaySpec> road;
  double spacing = 0.5;
  // Uniform lateral noise on lane points; headings are left untouched.
  double jitter = 0.0;
  // Defaults to the origin heading 0 for straight/arc roads and to the
  // northbound approach (w/2, -leg_length/2) for the four-way.
  std::optional<Pose> ego;
};

// Throws kInvalidSpec for non-positive sizes, zero lanes and similar.
Scene synth_scene(const SyntheticSpec& spec, std::uint64_t seed = 0);

// Fixture trajectories, in the local frame of `ego`.
//
// FollowLanes steps `step_m` at a time along the nearest lane heading plus
// `heading_offset_deg`; an offset near 180 gives a wrong-way trajectory.
geometry::Trajectory FollowLanes(const Scene& scene, const Pose& ego, std::size_t steps,
                                 double step_m, double heading_offset_deg = 0.0,
                                 double dt = 0.5);

// Independent uniform headings, step lengths uniform in [min_step_m, max_step_m].
geometry::Trajectory RandomWalk(std::uint64_t seed, std::size_t steps, double min_step_m,
                                double max_step_m, double dt = 0.5);

// Portable uniform draws in [0, 1) from a 64-bit Mersenne twister.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace offyaw::scene

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

// JSON interchange formats for scenes and prediction batches.
//
// Scene:
//   {"lanes":   [{"id": "a", "points": [[x, y], ...], "headings_deg": [...]}],
//    "regions": [{"kind": "intersection" | "drivable", "vertices": [[x, y], ...]}],
//    "ego":     {"x": 0, "y": 0, "heading_deg": 0}}
//
// Predictions: an array of samples,
//   [{"ego": {...}, "dt": 0.5,
//     "modes": [{"probability": 0.6, "points": [[0, 0], [x, y], ...]}],
//     "gt": [[0, 0], ...]}]                      // "gt" optional
//
// Ground truth: an array with one entry per sample, either a bare point list
// or {"points": [...]}.
//
// Distances are metres and angles degrees throughout.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "offyaw/metrics.hpp"
#include "offyaw/scene.hpp"
#include "offyaw/yawloss.hpp"

namespace offyaw::io {

scene::Scene SceneFromJson(const std::string& text, const std::string& origin = "scene");
std::string SceneToJson(const scene::Scene& scene);
scene::Scene LoadScene(const std::filesystem::path& path);
void SaveScene(const scene::Scene& scene, const std::filesystem::path& path);

struct Sample {
  metrics::PredictionSet preds;
  std::optional<geometry::Trajectory> gt;

  friend bool operator==(const Sample&, const Sample&) = default;
};

std::vector<Sample> SamplesFromJson(const std::string& text,
                                    const std::string& origin = "predictions");
std::string SamplesToJson(const std::vector<Sample>& samples);
std::vector<Sample> LoadSamples(const std::filesystem::path& path);
void SaveSamples(const std::vector<Sample>& samples, const std::filesystem::path& path);

// Trajectories take their dt from `dt`.
std::vector<geometry::Trajectory> GroundTruthFromJson(const std::string& text, double dt,
                                                      const std::string& origin = "gt");
std::string GroundTruthToJson(const std::vector<geometry::Trajectory>& gts);

// One row per trace entry: sample,step,total,yaw,anchor.
std::string TraceToCsv(const std::vector<std::vector<yawloss::TraceRow>>& traces);

}  // namespace offyaw::io

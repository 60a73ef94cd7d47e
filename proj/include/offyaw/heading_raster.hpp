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

// The secondary heading map: an 8-bit grid aligned with the ego pose where
// each cell stores the encoded global heading of the nearest lane point, and
// 0 marks cells whose centre lies in an intersection.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "offyaw/scene.hpp"

namespace offyaw::raster {

using geometry::AngleDeg;
using geometry::Point2;
using geometry::Pose;

inline constexpr std::uint8_t kIntersectionValue = 0;
// Width of one heading bin in degrees.
inline constexpr double kHeadingBinDeg = 360.0 / 254.0;

std::uint8_t encode_heading(AngleDeg theta);
// Throws kIntersectionSentinel for g == 0.
AngleDeg decode_heading(std::uint8_t g);

struct RasterSpec {
  Pose origin_pose;
  double behind_m = 20.0;
  double ahead_m = 80.0;
  double left_m = 50.0;
  double right_m = 50.0;
  double resolution = 0.2;

  // Throws kInvalidSpec unless every extent is positive and extents divide
  // evenly into cells.
  void Validate() const;
  std::size_t width() const;
  std::size_t height() const;

  friend bool operator==(const RasterSpec&, const RasterSpec&) = default;
};

struct CellIndex {
  std::size_t row = 0;
  std::size_t col = 0;
};

// Continuous raster coordinates in metres: u grows with columns (to the
// right of the origin pose) and v with rows (forward), both zero at the
// far-left, far-behind corner.
struct RasterCoords {
  double u = 0.0;
  double v = 0.0;
};

struct RasterLookup {
  enum class Kind { kHeading, kIntersection, kOffMap };
  Kind kind = Kind::kOffMap;
  AngleDeg heading;  // meaningful only for kHeading
};

class HeadingRaster {
 public:
  // Throws kInvalidSpec if `cells` does not match the RasterSpec dimensions.
  HeadingRaster(RasterSpec spec, std::vector<std::uint8_t> cells);

  const RasterSpec& spec() const { return spec_; }
  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t cell_count() const { return cells_.size(); }
  // Row-major, row 0 is the far-behind edge.
  const std::vector<std::uint8_t>& cells() const { return cells_; }
  std::uint8_t at(std::size_t row, std::size_t col) const {
    return cells_[row * width_ + col];
  }

  RasterCoords coords(Point2 p_global) const;
  std::optional<CellIndex> locate(Point2 p_global) const;
  Point2 cell_center(std::size_t row, std::size_t col) const;

  friend bool operator==(const HeadingRaster& a, const HeadingRaster& b) {
    return a.spec_ == b.spec_ && a.cells_ == b.cells_;
  }

 private:
  RasterSpec spec_;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Cell centres in an intersection get 0, all others the encoded heading of
// the nearest lane point. Rows are filled in parallel.
HeadingRaster rasterize(const scene::Scene& scene, const RasterSpec& spec);

// Nearest cell, no interpolation.
RasterLookup query(const HeadingRaster& raster, Point2 p_global);

// Binary PGM (P5, maxval 255) plus a JSON sidecar holding the RasterSpec.
std::filesystem::path SidecarPath(const std::filesystem::path& pgm_path);
std::string EncodePgm(const HeadingRaster& raster);
std::string EncodeSidecar(const RasterSpec& spec);
HeadingRaster DecodeRaster(const std::string& pgm_bytes,
                           const std::string& sidecar_json);
// Throws kIo on filesystem failures and kParse on malformed content.
void WriteRaster(const HeadingRaster& raster, const std::filesystem::path& pgm_path);
HeadingRaster ReadRaster(const std::filesystem::path& pgm_path);

}  // namespace offyaw::raster

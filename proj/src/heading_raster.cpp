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

#include "offyaw/heading_raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "offyaw/error.hpp"
#include "offyaw/spatial_index.hpp"

namespace offyaw::raster {
namespace {

using detail::json;

std::size_t CellsAlong(double extent, double resolution, const char* axis) {
  const double cells = extent / resolution;
  const double rounded = std::round(cells);
  if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string(axis) + " extent is not a whole number of cells");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::uint8_t encode_heading(AngleDeg theta) {
  // nearbyint under the default rounding mode rounds half to even.
  const double g = 1.0 + std::nearbyint(254.0 * theta.degrees() / 360.0);
  return static_cast<std::uint8_t>(std::clamp(g, 1.0, 255.0));
}

AngleDeg decode_heading(std::uint8_t g) {
  if (g == kIntersectionValue) {
    throw Error(ErrorCode::kIntersectionSentinel,
                "value 0 marks an intersection, not a heading");
  }
  return AngleDeg(static_cast<double>(g - 1) * 360.0 / 254.0);
}

void RasterSpec::Validate() const {
  for (double extent : {behind_m, ahead_m, left_m, right_m}) {
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      throw Error(ErrorCode::kInvalidSpec, "raster extents must be > 0");
    }
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidSpec, "raster resolution must be > 0");
  }
  if (!geometry::IsFinite(origin_pose.position)) {
    throw Error(ErrorCode::kInvalidSpec, "raster origin is not finite");
  }
  width();
  height();
}

std::size_t RasterSpec::width() const {
  return CellsAlong(left_m + right_m, resolution, "lateral");
}

std::size_t RasterSpec::height() const {
  return CellsAlong(behind_m + ahead_m, resolution, "longitudinal");
}

HeadingRaster::HeadingRaster(RasterSpec spec, std::vector<std::uint8_t> cells)
    : spec_(spec), cells_(std::move(cells)) {
  spec_.Validate();
  width_ = spec_.width();
  height_ = spec_.height();
  if (cells_.size() != width_ * height_) {
    throw Error(ErrorCode::kInvalidSpec,
                "raster has " + std::to_string(cells_.size()) + " cells, spec needs " +
                    std::to_string(width_ * height_));
  }
}

RasterCoords HeadingRaster::coords(Point2 p_global) const {
  const Point2 local = geometry::GlobalToLocal(p_global, spec_.origin_pose);
  return {local.x + spec_.left_m, local.y + spec_.behind_m};
}

std::optional<CellIndex> HeadingRaster::locate(Point2 p_global) const {
  const RasterCoords c = coords(p_global);
  const double col = std::floor(c.u / spec_.resolution);
  const double row = std::floor(c.v / spec_.resolution);
  if (!(col >= 0.0 && row >= 0.0 && col < static_cast<double>(width_) &&
        row < static_cast<double>(height_))) {
    return std::nullopt;
  }
  return CellIndex{static_cast<std::size_t>(row), static_cast<std::size_t>(col)};
}

Point2 HeadingRaster::cell_center(std::size_t row, std::size_t col) const {
  const Point2 local{(static_cast<double>(col) + 0.5) * spec_.resolution - spec_.left_m,
                     (static_cast<double>(row) + 0.5) * spec_.resolution - spec_.behind_m};
  return geometry::LocalToGlobal(local, spec_.origin_pose);
}

HeadingRaster rasterize(const scene::Scene& scene, const RasterSpec& spec) {
  spec.Validate();
  const LanePointIndex index = build_index(scene);
  // Built only to borrow cell_center(); cells are filled below.
  HeadingRaster grid(spec, std::vector<std::uint8_t>(spec.width() * spec.height()));
  std::vector<std::uint8_t> cells(grid.cell_count());

  auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t row = row_begin; row < row_end; ++row) {
      for (std::size_t col = 0; col < grid.width(); ++col) {
        const Point2 center = grid.cell_center(row, col);
        std::uint8_t value = kIntersectionValue;
        if (!scene::in_region(scene, center, scene::RegionKind::kIntersection)) {
          const scene::LanePointRef ref = index.nearest(center);
          value = encode_heading(scene.lanes()[ref.lane].headings[ref.point]);
        }
        cells[row * grid.width() + col] = value;
      }
    }
  };

  const std::size_t rows = grid.height();
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, rows / 16));
  if (workers <= 1) {
    fill_rows(0, rows);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(fill_rows, rows * w / workers, rows * (w + 1) / workers);
    }
  }
  return HeadingRaster(spec, std::move(cells));
}

RasterLookup query(const HeadingRaster& raster, Point2 p_global) {
  const std::optional<CellIndex> cell = raster.locate(p_global);
  if (!cell) return {RasterLookup::Kind::kOffMap, AngleDeg()};
  const std::uint8_t g = raster.at(cell->row, cell->col);
  if (g == kIntersectionValue) return {RasterLookup::Kind::kIntersection, AngleDeg()};
  return {RasterLookup::Kind::kHeading, decode_heading(g)};
}

std::filesystem::path SidecarPath(const std::filesystem::path& pgm_path) {
  std::filesystem::path sidecar = pgm_path;
  sidecar.replace_extension(".json");
  return sidecar;
}

std::string EncodePgm(const HeadingRaster& raster) {
  std::string out = "P5\n" + std::to_string(raster.width()) + " " +
                    std::to_string(raster.height()) + "\n255\n";
  out.append(raster.cells().begin(), raster.cells().end());
  return out;
}

std::string EncodeSidecar(const RasterSpec& spec) {
  const json j = {{"format", "offyaw-heading-raster"},
                  {"origin_pose", detail::PoseToJson(spec.origin_pose)},
                  {"behind_m", spec.behind_m},
                  {"ahead_m", spec.ahead_m},
                  {"left_m", spec.left_m},
                  {"right_m", spec.right_m},
                  {"resolution", spec.resolution},
                  {"width", spec.width()},
                  {"height", spec.height()}};
  return j.dump(2) + "\n";
}

namespace {

// Reads one whitespace-delimited PGM header token, skipping # comments.
std::string PgmToken(const std::string& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t begin = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (begin == pos) throw Error(ErrorCode::kParse, "truncated PGM header");
  return bytes.substr(begin, pos - begin);
}

std::size_t PgmNumber(const std::string& bytes, std::size_t& pos) {
  const std::string token = PgmToken(bytes, pos);
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) throw Error(ErrorCode::kParse, "bad PGM header field '" + token + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

HeadingRaster DecodeRaster(const std::string& pgm_bytes,
                           const std::string& sidecar_json) {
  std::size_t pos = 0;
  if (PgmToken(pgm_bytes, pos) != "P5") {
    throw Error(ErrorCode::kParse, "not a binary PGM (P5) file");
  }
  const std::size_t width = PgmNumber(pgm_bytes, pos);
  const std::size_t height = PgmNumber(pgm_bytes, pos);
  const std::size_t maxval = PgmNumber(pgm_bytes, pos);
  if (maxval != 255) throw Error(ErrorCode::kParse, "PGM maxval must be 255");
  // Exactly one whitespace byte separates the header from the raster.
  ++pos;
  if (pgm_bytes.size() < pos || pgm_bytes.size() - pos != width * height) {
    throw Error(ErrorCode::kParse, "PGM payload size does not match its header");
  }

  const json j = detail::ParseJson(sidecar_json, "raster sidecar");
  const std::string where = "raster sidecar";
  RasterSpec spec;
  spec.origin_pose = detail::PoseFromJson(detail::Field(j, "origin_pose", where), where + ".origin_pose");
  spec.behind_m = detail::Number(detail::Field(j, "behind_m", where), where);
  spec.ahead_m = detail::Number(detail::Field(j, "ahead_m", where), where);
  spec.left_m = detail::Number(detail::Field(j, "left_m", where), where);
  spec.right_m = detail::Number(detail::Field(j, "right_m", where), where);
  spec.resolution = detail::Number(detail::Field(j, "resolution", where), where);
  spec.Validate();
  if (spec.width() != width || spec.height() != height) {
    throw Error(ErrorCode::kParse, "sidecar extents disagree with PGM dimensions");
  }
  std::vector<std::uint8_t> cells(pgm_bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                  pgm_bytes.end());
  return HeadingRaster(spec, std::move(cells));
}

void WriteRaster(const HeadingRaster& raster, const std::filesystem::path& pgm_path) {
  detail::WriteFile(pgm_path, EncodePgm(raster));
  detail::WriteFile(SidecarPath(pgm_path), EncodeSidecar(raster.spec()));
}

HeadingRaster ReadRaster(const std::filesystem::path& pgm_path) {
  return DecodeRaster(detail::ReadFile(pgm_path),
                      detail::ReadFile(SidecarPath(pgm_path)));
}

}  // namespace offyaw::raster

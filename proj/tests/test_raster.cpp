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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "offyaw/error.hpp"
#include "offyaw/heading_raster.hpp"
#include "offyaw/spatial_index.hpp"
#include "offyaw/synth.hpp"
#include "oracles.hpp"

using namespace offyaw;
using namespace offyaw::raster;
using scene::Scene;
using scene::SyntheticSpec;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no offyaw::Error thrown");
  return ErrorCode::kInvalidArgument;
}

Scene Straight(std::vector<double> headings) {
  SyntheticSpec spec;
  spec.road = scene::StraightRoadSpec{std::move(headings)};
  return scene::synth_scene(spec);
}

}  // namespace

TEST_CASE("encode examples") {
  CHECK(encode_heading(AngleDeg(0)) == 1);
  CHECK(encode_heading(AngleDeg(180)) == 128);
  CHECK(encode_heading(AngleDeg(359)) == 254);
  CHECK(encode_heading(AngleDeg(359.9)) == 255);
}

TEST_CASE("decode examples and sentinel") {
  CHECK(decode_heading(1).degrees() == 0.0);
  CHECK(decode_heading(128).degrees() == 180.0);
  CHECK(decode_heading(255).degrees() == 0.0);
  CHECK(CodeOf([] { decode_heading(0); }) == ErrorCode::kIntersectionSentinel);
}

TEST_CASE("encode sweep: oracle, monotone, surjective, round-trip bound") {
  std::vector<bool> seen(256, false);
  int prev = 0;
  double worst = 0.0;
  for (int i = 0; i < 36000; ++i) {
    const double theta = i * 0.01;
    const std::uint8_t g = encode_heading(AngleDeg(theta));
    REQUIRE(g == oracle::Encode(theta));
    REQUIRE(g >= 1);
    REQUIRE(static_cast<int>(g) >= prev);
    prev = g;
    seen[g] = true;
    worst = std::max(worst, oracle::AngleGap(oracle::Decode(g), theta));
    REQUIRE(oracle::Decode(g) == doctest::Approx(decode_heading(g).degrees()).epsilon(1e-15));
  }
  for (int g = 1; g < 256; ++g) CHECK_MESSAGE(seen[g], "value never produced: " << g);
  CHECK(worst <= 180.0 / 254.0 + 1e-9);
}

TEST_CASE("half-bin ties round to even") {
  // 254 * theta / 360 = 0.5 exactly at theta = 180/254; rounds to 0.
  // Use the exact boundary representable through multiplication.
  for (int k = 0; k < 254; ++k) {
    const double theta = (k + 0.5) * 360.0 / 254.0;
    if (254.0 * theta / 360.0 != k + 0.5) continue;  // not an exact tie in binary
    const int expected = 1 + (k % 2 == 0 ? k : k + 1);
    REQUIRE(encode_heading(AngleDeg(theta)) == std::min(expected, 255));
  }
}

TEST_CASE("raster spec") {
  RasterSpec spec;
  CHECK(spec.width() == 500);
  CHECK(spec.height() == 500);
  spec.resolution = 0.3;
  CHECK(CodeOf([&] { spec.Validate(); }) == ErrorCode::kInvalidSpec);
  spec.resolution = 1.0;
  spec.left_m = 0;
  CHECK(CodeOf([&] { spec.Validate(); }) == ErrorCode::kInvalidSpec);
  spec.left_m = 50;
  spec.resolution = -1;
  CHECK(CodeOf([&] { spec.Validate(); }) == ErrorCode::kInvalidSpec);
}

TEST_CASE("index: two-lane queries and single-point set") {
  const Scene s = Straight({0, 180});
  const LanePointIndex index = build_index(s);
  for (Point2 p : {Point2{1, 0}, Point2{1.75, 0}, Point2{3, 7.3}}) {
    const scene::LanePointRef ref = index.nearest(p);
    CHECK(s.lanes()[ref.lane].headings[ref.point] == scene::nearest_lane_heading(s, p));
    CHECK(ref == scene::nearest_lane_point(s, p));
  }
  const LanePointIndex single(std::vector<LanePointIndex::Entry>{{{3, 4}, {0, 0, 0}}});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 100; ++i) {
    const Point2 p{u(rng), u(rng)};
    const auto ref = single.nearest(p);
    REQUIRE(ref.lane == 0);
    REQUIRE(ref.point == 0);
    REQUIRE(ref.squared_distance == geometry::SquaredDistance(p, {3, 4}));
  }
  CHECK(CodeOf([] { LanePointIndex(std::vector<LanePointIndex::Entry>{}); }) == ErrorCode::kEmptyScene);
}

TEST_CASE("index: 10,000 random queries on a 10,000-point scene") {
  SyntheticSpec spec;
  // 25 lanes x 401 points, with jitter so distances are irregular.
  spec.road = scene::StraightRoadSpec{std::vector<double>(25, 0.0), 3.5, 200, 100};
  spec.jitter = 0.1;
  const Scene s = scene::synth_scene(spec, 3);
  REQUIRE(s.lane_point_count() >= 10000);
  const LanePointIndex index = build_index(s);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(-40, 130), uy(-150, 150);
  for (int i = 0; i < 10000; ++i) {
    const Point2 p{ux(rng), uy(rng)};
    const auto ref = index.nearest(p);
    const oracle::Nearest o = oracle::NearestLane(s, p);
    REQUIRE(s.lanes()[ref.lane].id == o.lane_id);
    REQUIRE(ref.point == o.point);
  }
}

TEST_CASE("index: exact ties on a lattice") {
  // Points on an integer lattice; queries at lattice-cell centres are
  // equidistant from four points.
  std::vector<LanePointIndex::Entry> entries;
  std::vector<Point2> pts;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      entries.push_back({{double(x), double(y)}, {0, pts.size(), 0}});
      pts.push_back({double(x), double(y)});
    }
  }
  const LanePointIndex index(entries);
  for (int y = 0; y < 19; ++y) {
    for (int x = 0; x < 19; ++x) {
      const Point2 q{x + 0.5, y + 0.5};
      const auto ref = index.nearest(q);
      // Lowest index among the four corners is (x, y).
      REQUIRE(ref.point == static_cast<std::size_t>(y * 20 + x));
    }
  }
}

TEST_CASE("rasterize examples") {
  const Scene uniform = Straight({0});
  const HeadingRaster r = rasterize(uniform, RasterSpec{});
  REQUIRE(r.cell_count() == 250000);
  CHECK(std::all_of(r.cells().begin(), r.cells().end(), [](auto v) { return v == 1; }));
  const auto at_center = query(r, r.cell_center(100, 250));
  CHECK(at_center.kind == RasterLookup::Kind::kHeading);
  CHECK(at_center.heading.degrees() == 0.0);
  CHECK(query(r, {0, 200}).kind == RasterLookup::Kind::kOffMap);
  CHECK(query(r, {0, -20.001}).kind == RasterLookup::Kind::kOffMap);
  CHECK(query(r, {0, -19.999}).kind == RasterLookup::Kind::kHeading);
  CHECK(query(r, {-50.001, 0}).kind == RasterLookup::Kind::kOffMap);
  CHECK(query(r, {49.999, 79.999}).kind == RasterLookup::Kind::kHeading);

  SyntheticSpec spec;
  spec.road = scene::FourWaySpec{};
  const Scene four = scene::synth_scene(spec);
  RasterSpec rs;
  rs.origin_pose = four.ego();
  const HeadingRaster fr = rasterize(four, rs);
  CHECK(query(fr, {0, 0}).kind == RasterLookup::Kind::kIntersection);
  std::size_t checked = 0;
  for (std::size_t row = 0; row < fr.height(); ++row) {
    for (std::size_t col = 0; col < fr.width(); ++col) {
      const Point2 c = fr.cell_center(row, col);
      const bool inside = oracle::InRegion(four, c, scene::RegionKind::kIntersection);
      REQUIRE((fr.at(row, col) == 0) == inside);
      checked += inside;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("rasterize matches the oracle under a rotated, offset origin") {
  SyntheticSpec spec;
  spec.road = scene::StraightRoadSpec{{0, 180}};
  const Scene s = scene::synth_scene(spec);
  RasterSpec rs;
  rs.origin_pose = {{2.0, -7.0}, AngleDeg(33.0)};
  rs.behind_m = 10;
  rs.ahead_m = 30;
  rs.left_m = 15;
  rs.right_m = 25;
  rs.resolution = 0.4;
  const HeadingRaster r = rasterize(s, rs);
  CHECK(r.width() == 100);
  CHECK(r.height() == 100);
  for (std::size_t row = 0; row < r.height(); ++row) {
    for (std::size_t col = 0; col < r.width(); ++col) {
      const Point2 c = oracle::CellCenter(rs, row, col);
      REQUIRE(geometry::Distance(c, r.cell_center(row, col)) < 1e-9);
      REQUIRE(r.at(row, col) == oracle::ExpectedCell(s, r.cell_center(row, col)));
      // locate() must map the centre back to its own cell.
      const auto cell = r.locate(c);
      REQUIRE(cell);
      REQUIRE(cell->row == row);
      REQUIRE(cell->col == col);
    }
  }
  // Row 0 is behind the origin, the last row ahead of it.
  const Point2 behind = geometry::GlobalToLocal(r.cell_center(0, 50), rs.origin_pose);
  const Point2 ahead = geometry::GlobalToLocal(r.cell_center(99, 50), rs.origin_pose);
  CHECK(behind.y < 0);
  CHECK(ahead.y > 0);
  const Point2 left = geometry::GlobalToLocal(r.cell_center(50, 0), rs.origin_pose);
  CHECK(left.x < 0);
}

TEST_CASE("rasterize is deterministic") {
  SyntheticSpec spec;
  spec.road = scene::ArcRoadSpec{};
  const Scene s = scene::synth_scene(spec);
  const HeadingRaster a = rasterize(s, RasterSpec{});
  const HeadingRaster b = rasterize(s, RasterSpec{});
  CHECK(a == b);
  CHECK(EncodePgm(a) == EncodePgm(b));
}

TEST_CASE("PGM and sidecar round trip") {
  SyntheticSpec spec;
  spec.road = scene::FourWaySpec{};
  const Scene s = scene::synth_scene(spec);
  RasterSpec rs;
  rs.origin_pose = {{1.25, -3.5}, AngleDeg(12.5)};
  rs.resolution = 0.5;
  const HeadingRaster r = rasterize(s, rs);
  const std::string pgm = EncodePgm(r);
  CHECK(pgm.rfind("P5\n200 200\n255\n", 0) == 0);
  CHECK(pgm.size() == 15 + 200 * 200);
  const HeadingRaster back = DecodeRaster(pgm, EncodeSidecar(r.spec()));
  CHECK(back == r);

  const auto dir = std::filesystem::temp_directory_path() / "offyaw_raster_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "r.pgm";
  WriteRaster(r, path);
  CHECK(std::filesystem::exists(dir / "r.json"));
  CHECK(ReadRaster(path) == r);
  std::filesystem::remove_all(dir);

  // Header comments are accepted.
  std::string commented = pgm;
  commented.insert(3, "# made by hand\n");
  CHECK(DecodeRaster(commented, EncodeSidecar(r.spec())) == r);
}

TEST_CASE("malformed rasters") {
  RasterSpec rs;
  rs.resolution = 10;
  const HeadingRaster r(rs, std::vector<std::uint8_t>(100, 7));
  const std::string pgm = EncodePgm(r);
  const std::string side = EncodeSidecar(rs);
  CHECK(CodeOf([&] { DecodeRaster("P2\n10 10\n255\n", side); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { DecodeRaster(pgm.substr(0, pgm.size() - 1), side); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { DecodeRaster("P5\n10 x\n255\n", side); }) == ErrorCode::kParse);
  CHECK(CodeOf([&] { DecodeRaster(pgm, "{"); }) == ErrorCode::kParse);
  RasterSpec other = rs;
  other.resolution = 5;
  CHECK(CodeOf([&] { DecodeRaster(pgm, EncodeSidecar(other)); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ReadRaster("/nonexistent/r.pgm"); }) == ErrorCode::kIo);
  CHECK(CodeOf([&] { HeadingRaster(rs, std::vector<std::uint8_t>(99)); }) ==
        ErrorCode::kInvalidSpec);
}

TEST_CASE("sidecar naming") {
  CHECK(SidecarPath("a/b.pgm") == std::filesystem::path("a/b.json"));
  CHECK(SidecarPath("raster") == std::filesystem::path("raster.json"));
}

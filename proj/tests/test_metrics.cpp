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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "offyaw/error.hpp"
#include "offyaw/heading_raster.hpp"
#include "offyaw/metrics.hpp"
#include "offyaw/synth.hpp"
#include "oracles.hpp"

using namespace offyaw;
using namespace offyaw::metrics;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no offyaw::Error thrown");
  return ErrorCode::kInvalidArgument;
}

// Straight segments of unit length at `heading_deg`, local frame.
Trajectory Ray(double heading_deg, std::size_t steps = 12, double step = 1.0) {
  std::vector<Point2> pts{{0, 0}};
  const double r = heading_deg * kPi / 180.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    pts.push_back({k * step * std::sin(r), k * step * std::cos(r)});
  }
  return Trajectory(pts, 0.5);
}

Trajectory Shift(const Trajectory& t, Point2 d) {
  std::vector<Point2> pts = t.points();
  for (std::size_t i = 1; i < pts.size(); ++i) pts[i] = pts[i] + d;
  return Trajectory(pts, t.dt());
}

struct UniformWorld {
  scene::Scene scene = scene::synth_scene({scene::StraightRoadSpec{}});
  raster::HeadingRaster raster = raster::rasterize(scene, raster::RasterSpec{});
};

const UniformWorld& Uniform() {
  static const UniformWorld w;
  return w;
}

// Naive per-definition oracles over plain point lists.
double OracleAde(const Trajectory& a, const Trajectory& b) {
  double s = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    s += std::hypot(a.points()[i].x - b.points()[i].x, a.points()[i].y - b.points()[i].y);
  }
  return s / double(a.size() - 1);
}
double OracleFde(const Trajectory& a, const Trajectory& b) {
  const auto p = a.points().back(), q = b.points().back();
  return std::hypot(p.x - q.x, p.y - q.y);
}
double OracleMaxDev(const Trajectory& a, const Trajectory& b) {
  double m = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    m = std::max(m, std::hypot(a.points()[i].x - b.points()[i].x,
                               a.points()[i].y - b.points()[i].y));
  }
  return m;
}
std::vector<std::size_t> OracleTopK(const std::vector<double>& p, int k) {
  std::vector<std::size_t> idx;
  std::vector<bool> used(p.size(), false);
  for (int r = 0; r < k && r < int(p.size()); ++r) {
    std::size_t best = p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!used[i] && (best == p.size() || p[i] > p[best])) best = i;
    }
    used[best] = true;
    idx.push_back(best);
  }
  return idx;
}

PredictionSet RandomPreds(std::mt19937_64& rng, std::size_t modes, std::size_t steps) {
  PredictionSet ps;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double total = 0;
  for (std::size_t m = 0; m < modes; ++m) {
    ps.trajectories.push_back(scene::RandomWalk(rng(), steps, 0.2, 2.0));
    ps.probabilities.push_back(u(rng));
    total += ps.probabilities.back();
  }
  for (double& p : ps.probabilities) p /= total;
  return ps;
}

}  // namespace

TEST_CASE("off-yaw measure examples on the uniform scene") {
  const auto& w = Uniform();
  const Pose ego = w.scene.ego();
  CHECK(off_yaw_measure(Ray(0), w.raster, ego) == 0.0);
  CHECK(off_yaw_measure(Ray(180), w.raster, ego) == kPi);
  CHECK(off_yaw_measure(Ray(30), w.raster, ego) == 0.0);
  CHECK(off_yaw_measure(Ray(45), w.raster, ego) == 0.0);
  CHECK(off_yaw_measure(Ray(50), w.raster, ego) ==
        doctest::Approx(50.0 * kPi / 180.0).epsilon(1e-12));
  CHECK(off_yaw_measure(Ray(310), w.raster, ego) ==
        doctest::Approx(50.0 * kPi / 180.0).epsilon(1e-12));
}

TEST_CASE("off-yaw masks stationary, off-map and intersection segments") {
  const auto& w = Uniform();
  // Two stationary steps out of four, the rest reversed.
  const Trajectory t({{0, 0}, {0, 0}, {0, -1}, {0, -1}, {0, -2}}, 0.5);
  const OffYawBreakdown b = off_yaw_breakdown(t, w.raster, w.scene.ego(), 45.0);
  CHECK(b.stationary_segments == 2);
  CHECK(b.penalized_segments == 2);
  CHECK(b.measure_rad == doctest::Approx(kPi / 2.0));
  CHECK(b.segment_sum_rad == doctest::Approx(2.0 * kPi));

  // Reversed path that leaves the map behind the ego after 20 m.
  const OffYawBreakdown off = off_yaw_breakdown(Ray(180, 40), w.raster, w.scene.ego(), 45.0);
  CHECK(off.off_map_midpoints == 20);
  CHECK(off.measure_rad == doctest::Approx(kPi / 2.0));

  scene::SyntheticSpec spec;
  spec.road = scene::FourWaySpec{};
  const scene::Scene four = scene::synth_scene(spec);
  raster::RasterSpec rs;
  rs.origin_pose = four.ego();
  const auto fr = raster::rasterize(four, rs);
  const auto terms = off_yaw_segments(Ray(0, 40), fr, four.ego());
  std::size_t masked = 0;
  for (const auto& t : terms) {
    const bool inside = oracle::InRegion(four, t.midpoint_global, scene::RegionKind::kIntersection);
    if (inside) {
      REQUIRE(t.status == SegmentTerm::Status::kIntersection);
      REQUIRE(t.delta_deg == 0.0);
      ++masked;
    }
  }
  CHECK(masked > 0);
}

TEST_CASE("off-yaw matches the definition oracle on random inputs") {
  std::mt19937_64 rng(21);
  scene::SyntheticSpec spec;
  spec.road = scene::FourWaySpec{};
  const scene::Scene four = scene::synth_scene(spec);
  raster::RasterSpec rs;
  rs.origin_pose = {{1, -20}, AngleDeg(20)};
  const auto fr = raster::rasterize(four, rs);
  std::uniform_real_distribution<double> u(-30, 30), h(0, 360), a(0, 120);
  for (int i = 0; i < 500; ++i) {
    const Pose ego{{u(rng), u(rng)}, AngleDeg(h(rng))};
    const Trajectory t = scene::RandomWalk(rng(), 12, 0.1, 3.0);
    const double alpha = a(rng);
    REQUIRE(off_yaw_measure(t, fr, ego, alpha) ==
            doctest::Approx(oracle::OffYaw(t.points(), ego, fr, alpha)).epsilon(1e-12));
  }
}

TEST_CASE("off-yaw invariant under rigid rotation of scene, ego and trajectory") {
  std::mt19937_64 rng(8);
  const scene::Scene base = scene::synth_scene({scene::StraightRoadSpec{{0, 180, 0}}});
  // The rotation has to keep the grid aligned and every lane heading on an
  // exact encoding bin; 90 degrees fails the latter (encode(90) decodes to
  // 90.71), so only the half turn is exact.
  for (double rot : {180.0}) {
    const Pose r{{0, 0}, AngleDeg(rot)};
    std::vector<scene::LanePolyline> lanes = base.lanes();
    for (auto& lane : lanes) {
      for (auto& p : lane.points) p = geometry::LocalToGlobal(p, r);
      for (auto& hd : lane.headings) hd = geometry::to_global(hd, r);
    }
    const scene::Scene rotated(lanes, {}, {{0, 0}, AngleDeg(rot)});
    raster::RasterSpec s0, s1;
    s1.origin_pose = rotated.ego();
    const auto r0 = raster::rasterize(base, s0);
    const auto r1 = raster::rasterize(rotated, s1);
    for (int i = 0; i < 100; ++i) {
      const Trajectory t = scene::RandomWalk(rng(), 12, 0.3, 2.0);
      REQUIRE(off_yaw_measure(t, r0, base.ego()) ==
              doctest::Approx(off_yaw_measure(t, r1, rotated.ego())).epsilon(1e-12));
    }
  }
}

TEST_CASE("raising alpha never increases off-yaw") {
  std::mt19937_64 rng(4);
  const auto& w = Uniform();
  for (int i = 0; i < 200; ++i) {
    const Trajectory t = scene::RandomWalk(rng(), 12, 0.3, 2.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha = 0; alpha < 180; alpha += 7.5) {
      const double v = off_yaw_measure(t, w.raster, w.scene.ego(), alpha);
      REQUIRE(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("sample and rate normalisation") {
  const auto& w = Uniform();
  PredictionSet ps{{Ray(0), Ray(180)}, {0.5, 0.5}, w.scene.ego()};
  CHECK(off_yaw_sample(ps, w.raster) == doctest::Approx(kPi / 2));
  PredictionSet single{{Ray(180)}, {1.0}, w.scene.ego()};
  CHECK(off_yaw_sample(single, w.raster) == off_yaw_measure(Ray(180), w.raster, single.ego));
  const std::vector<OffYawInput> batch{{&ps, &w.raster}, {&single, &w.raster}};
  CHECK(off_yaw_rate(batch) == doctest::Approx((kPi / 2 + kPi) / 2));
  CHECK(CodeOf([] { off_yaw_rate({}); }) == ErrorCode::kEmptyBatch);
}

TEST_CASE("prediction set validation") {
  PredictionSet ps{{Ray(0), Ray(10)}, {0.5, 0.4}, {}};
  CHECK(CodeOf([&] { ps.Validate(); }) == ErrorCode::kInvalidArgument);
  ps.probabilities = {0.5, 0.5 + 5e-7};
  CHECK_NOTHROW(ps.Validate());
  ps.trajectories[1] = Ray(10, 11);
  CHECK(CodeOf([&] { ps.Validate(); }) == ErrorCode::kInvalidArgument);
  ps.trajectories.clear();
  ps.probabilities.clear();
  CHECK(CodeOf([&] { ps.Validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("top-k selection") {
  CHECK(top_k_modes({0.2, 0.5, 0.3}, 2).modes == std::vector<std::size_t>{1, 2});
  CHECK(top_k_modes({0.25, 0.5, 0.25}, 3).modes == std::vector<std::size_t>{1, 0, 2});
  const TopK c = top_k_modes({0.6, 0.4}, 5);
  CHECK(c.clamped);
  CHECK(c.modes.size() == 2);
  CHECK_FALSE(top_k_modes({0.6, 0.4}, 2).clamped);
  CHECK(CodeOf([] { top_k_modes({1.0}, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("displacement metric examples") {
  const Trajectory gt = Ray(0);
  const PredictionSet same{{gt}, {1.0}, {}};
  CHECK(min_ade_k(same, gt, 1).value == 0.0);
  const PredictionSet lateral{{Shift(gt, {1, 0})}, {1.0}, {}};
  CHECK(min_ade_k(lateral, gt, 1).value == doctest::Approx(1.0));
  CHECK(min_fde_k(lateral, gt, 1).value == doctest::Approx(1.0));
  // Most probable, not best.
  const PredictionSet two{{Shift(gt, {5, 0}), gt}, {0.9, 0.1}, {}};
  CHECK(min_ade_k(two, gt, 1).value == doctest::Approx(5.0));
  CHECK(min_ade_k(two, gt, 2).value == 0.0);
  const KMetric clamped = min_ade_k(two, gt, 5);
  CHECK(clamped.k_clamped);
  CHECK(clamped.value == 0.0);
  // Wrong start, right end.
  std::vector<Point2> pts = gt.points();
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) pts[i].x += 3.0;
  const PredictionSet ends{{Trajectory(pts, 0.5)}, {1.0}, {}};
  CHECK(min_fde_k(ends, gt, 1).value == 0.0);
  CHECK(min_ade_k(ends, gt, 1).value > 2.0);
  // Shape mismatch.
  CHECK(CodeOf([&] { min_ade_k(same, Ray(0, 11), 1); }) == ErrorCode::kBatchShapeMismatch);
}

TEST_CASE("miss rate examples") {
  const Trajectory gt = Ray(0);
  const PredictionSet hit{{gt}, {1.0}, {}};
  const PredictionSet far{{Shift(gt, {10, 0})}, {1.0}, {}};
  const std::vector<MissInput> all_hit{{&hit, &gt}, {&hit, &gt}};
  const std::vector<MissInput> all_miss{{&far, &gt}, {&far, &gt}};
  const std::vector<MissInput> half{{&hit, &gt}, {&far, &gt}};
  CHECK(miss_rate_k(all_hit, 1) == 0.0);
  CHECK(miss_rate_k(all_miss, 1) == 1.0);
  CHECK(miss_rate_k(half, 1) == 0.5);
  CHECK(CodeOf([] { miss_rate_k({}, 1); }) == ErrorCode::kEmptyBatch);
  // Exactly at the threshold is a hit.
  const PredictionSet edge{{Shift(gt, {2, 0})}, {1.0}, {}};
  CHECK_FALSE(is_miss(edge, gt, 1, 2.0));
  // One point out by more than the threshold is enough to miss.
  std::vector<Point2> pts = gt.points();
  pts[5].x += 2.5;
  const PredictionSet spike{{Trajectory(pts, 0.5)}, {1.0}, {}};
  CHECK(is_miss(spike, gt, 1, 2.0));
}

TEST_CASE("off-road rate") {
  const auto& w = Uniform();
  const PredictionSet on{{Ray(0), Ray(180)}, {0.5, 0.5}, w.scene.ego()};
  CHECK(off_road_rate(on, w.scene) == 0.0);
  const PredictionSet off{{Shift(Ray(0), {10, 0})}, {1.0}, w.scene.ego()};
  CHECK(off_road_rate(off, w.scene) == 1.0);
  // 6 of 24 points outside: two modes of 12 steps, one leaves for its last 6.
  std::vector<Point2> pts = Ray(0).points();
  for (std::size_t i = 7; i < pts.size(); ++i) pts[i].x = 5.0;
  const PredictionSet quarter{{Ray(0), Trajectory(pts, 0.5)}, {0.5, 0.5}, w.scene.ego()};
  CHECK(off_road_rate(quarter, w.scene) == 0.25);
  const scene::Scene bare({w.scene.lanes()}, {}, {});
  CHECK(CodeOf([&] { off_road_rate(on, bare); }) == ErrorCode::kMissingDrivableArea);
}

TEST_CASE("randomized metric properties against oracles") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t modes = 1 + rng() % 12;
    const PredictionSet ps = RandomPreds(rng, modes, 12);
    const Trajectory gt = scene::RandomWalk(rng(), 12, 0.2, 2.0);
    double prev_ade = 1e300, prev_fde = 1e300;
    bool prev_miss = true;
    for (int k : {1, 2, 3, 5, 10, 15}) {
      const auto top = OracleTopK(ps.probabilities, k);
      double ade = 1e300, fde = 1e300, dev = 1e300;
      for (std::size_t m : top) {
        ade = std::min(ade, OracleAde(ps.trajectories[m], gt));
        fde = std::min(fde, OracleFde(ps.trajectories[m], gt));
        dev = std::min(dev, OracleMaxDev(ps.trajectories[m], gt));
      }
      const double got_ade = min_ade_k(ps, gt, k).value;
      const double got_fde = min_fde_k(ps, gt, k).value;
      const bool miss = is_miss(ps, gt, k, 2.0);
      REQUIRE(got_ade == doctest::Approx(ade).epsilon(1e-12));
      REQUIRE(got_fde == doctest::Approx(fde).epsilon(1e-12));
      REQUIRE(miss == (dev > 2.0));
      REQUIRE(got_ade <= prev_ade);
      REQUIRE(got_fde <= prev_fde);
      REQUIRE((!miss || prev_miss));
      REQUIRE(got_fde <= dev + 1e-12);
      prev_ade = got_ade;
      prev_fde = got_fde;
      prev_miss = miss;
    }
  }
}

TEST_CASE("evaluate_batch aggregates and shape checks") {
  const auto& w = Uniform();
  std::mt19937_64 rng(5);
  std::vector<PredictionSet> preds;
  std::vector<Trajectory> gts;
  for (int i = 0; i < 20; ++i) {
    PredictionSet ps = RandomPreds(rng, 6, 12);
    ps.ego = w.scene.ego();
    preds.push_back(ps);
    gts.push_back(scene::RandomWalk(rng(), 12, 0.2, 2.0));
  }
  const std::vector<const scene::Scene*> scenes(20, &w.scene);
  const std::vector<const raster::HeadingRaster*> rasters(20, &w.raster);
  const EvalConfig cfg;
  const EvalReport r = evaluate_batch(preds, gts, scenes, rasters, cfg);
  REQUIRE(r.samples.size() == 20);
  double sum = 0;
  for (const auto& s : r.samples) sum += s.off_yaw_rad;
  CHECK(r.aggregate.off_yaw_rate_rad == sum / 20);
  for (int k : cfg.k_values) {
    double a = 0;
    for (const auto& s : r.samples) a += s.min_ade.at(k);
    CHECK(r.aggregate.min_ade.at(k) == a / 20);
  }
  CHECK(r.samples[0].k_clamped);  // k = 10 > 6 modes

  // Permuting samples keeps aggregates (up to summation order).
  std::vector<std::size_t> order(20);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<PredictionSet> p2;
  std::vector<Trajectory> g2;
  for (auto i : order) {
    p2.push_back(preds[i]);
    g2.push_back(gts[i]);
  }
  const EvalReport r2 = evaluate_batch(p2, g2, scenes, rasters, cfg);
  CHECK(r2.aggregate.off_yaw_rate_rad ==
        doctest::Approx(r.aggregate.off_yaw_rate_rad).epsilon(1e-14));
  CHECK(r2.aggregate.miss_rate == r.aggregate.miss_rate);
  CHECK(r2.aggregate.off_road_rate == doctest::Approx(r.aggregate.off_road_rate).epsilon(1e-14));

  // N = 1: aggregate equals the sample.
  const EvalReport one = evaluate_batch(std::span(preds).first(1), std::span(gts).first(1),
                                        std::span(scenes).first(1),
                                        std::span(rasters).first(1), cfg);
  CHECK(one.aggregate.off_yaw_rate_rad == one.samples[0].off_yaw_rad);
  CHECK(one.aggregate.min_fde == one.samples[0].min_fde);

  CHECK(CodeOf([&] {
          evaluate_batch(preds, std::span(gts).first(19), scenes, rasters, cfg);
        }) == ErrorCode::kBatchShapeMismatch);
  CHECK(CodeOf([&] {
          evaluate_batch({}, {}, {}, {}, cfg);
        }) == ErrorCode::kEmptyBatch);
}

TEST_CASE("reversed trajectory report: off-yaw pi, off-road 0") {
  const auto& w = Uniform();
  const PredictionSet ps{{Ray(180)}, {1.0}, w.scene.ego()};
  const std::vector<PredictionSet> preds{ps};
  const std::vector<Trajectory> gts{Ray(180)};
  const std::vector<const scene::Scene*> scenes{&w.scene};
  const std::vector<const raster::HeadingRaster*> rasters{&w.raster};
  const EvalReport r = evaluate_batch(preds, gts, scenes, rasters, EvalConfig{});
  CHECK(r.aggregate.off_yaw_rate_rad == kPi);
  CHECK(r.aggregate.off_road_rate == 0.0);
  CHECK(r.aggregate.off_yaw_event_fraction == 1.0);
}

TEST_CASE("horizon truncation") {
  const auto& w = Uniform();
  // 20 steps; only the first 12 are scored. Steps 13+ reverse.
  std::vector<Point2> pts = Ray(0, 12).points();
  for (int k = 1; k <= 8; ++k) pts.push_back({0, 12.0 - k});
  const Trajectory t(pts, 0.5);
  const PredictionSet ps{{t}, {1.0}, w.scene.ego()};
  const std::vector<PredictionSet> preds{ps};
  const std::vector<Trajectory> gts{t};
  const std::vector<const scene::Scene*> scenes{&w.scene};
  const std::vector<const raster::HeadingRaster*> rasters{&w.raster};
  EvalConfig cfg;
  CHECK(evaluate_batch(preds, gts, scenes, rasters, cfg).aggregate.off_yaw_rate_rad == 0.0);
  cfg.horizon_steps = 0;
  CHECK(evaluate_batch(preds, gts, scenes, rasters, cfg).aggregate.off_yaw_rate_rad ==
        doctest::Approx(8.0 * kPi / 20.0));
}

TEST_CASE("report JSON round trip and CSV layout") {
  const auto& w = Uniform();
  std::mt19937_64 rng(2);
  std::vector<PredictionSet> preds;
  std::vector<Trajectory> gts;
  for (int i = 0; i < 4; ++i) {
    PredictionSet ps = RandomPreds(rng, 3, 12);
    ps.ego = w.scene.ego();
    preds.push_back(ps);
    gts.push_back(ps.trajectories[0]);
  }
  const std::vector<const scene::Scene*> scenes(4, &w.scene);
  const std::vector<const raster::HeadingRaster*> rasters(4, &w.raster);
  const EvalReport r = evaluate_batch(preds, gts, scenes, rasters, EvalConfig{});
  const std::string json = ReportToJson(r);
  CHECK(ReportFromJson(json) == r);
  CHECK(ReportToJson(ReportFromJson(json)) == json);
  const std::string csv = ReportToCsv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.rfind("sample,min_ade_1,min_ade_5,min_ade_10,", 0) == 0);
  CHECK(csv.find("\naggregate,") != std::string::npos);
  CHECK(CodeOf([] { ReportFromJson("{\"config\": 3}"); }) == ErrorCode::kParse);
}

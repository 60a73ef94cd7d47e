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

#include "offyaw/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "offyaw/error.hpp"
#include "offyaw/heading_raster.hpp"
#include "offyaw/io.hpp"
#include "offyaw/metrics.hpp"
#include "offyaw/synth.hpp"
#include "offyaw/yawloss.hpp"

namespace offyaw::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string scene;
  std::string raster;
  std::string preds;
  std::string gt;
  std::string out;
  double alpha = 45.0;
  double resolution = 0.2;
  std::vector<double> extents = {20.0, 80.0, 50.0, 50.0};
  std::uint64_t seed = 0;
  std::string filter = "none";

  // eval
  std::vector<int> k_values = {1, 5, 10};
  double miss_threshold = 2.0;
  std::size_t horizon = 12;

  // gradcheck / refine
  double h = 1e-4;
  double tolerance = 1e-4;
  double scale = 1.0;
  double gate_width = 0.0;
  int steps = 500;
  double lr = 0.1;
  double anchor_weight = 0.0;
  bool no_line_search = false;

  // synth
  std::string kind = "straight";
  std::string fixture = "aligned";
  std::vector<double> headings = {0.0};
  double lane_width = 3.5;
  double length = 200.0;
  double radius = 20.0;
  double span = 90.0;
  double leg_length = 50.0;
  std::size_t samples = 4;
  std::size_t modes = 3;
  std::size_t traj_steps = 12;
  double step_length = 1.0;
  double dt = 0.5;
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIoError;
    case ErrorCode::kDivergedRefinement:
      return kExitCheckFailed;
    default:
      return kExitInputError;
  }
}

raster::RasterSpec SpecFromOptions(const Options& o, const geometry::Pose& origin) {
  raster::RasterSpec spec;
  spec.origin_pose = origin;
  spec.behind_m = o.extents[0];
  spec.ahead_m = o.extents[1];
  spec.left_m = o.extents[2];
  spec.right_m = o.extents[3];
  spec.resolution = o.resolution;
  return spec;
}

// --raster wins; otherwise the scene is rasterised around its ego pose.
raster::HeadingRaster ObtainRaster(const Options& o, const std::optional<scene::Scene>& scene) {
  if (!o.raster.empty()) return raster::ReadRaster(o.raster);
  if (!scene) throw Error(ErrorCode::kInvalidArgument, "need --raster or --scene");
  return raster::rasterize(*scene, SpecFromOptions(o, scene->ego()));
}

std::optional<scene::Scene> OptionalScene(const Options& o) {
  if (o.scene.empty()) return std::nullopt;
  return io::LoadScene(o.scene);
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int CmdRasterize(const Options& o, std::ostream& out) {
  const scene::Scene scene = io::LoadScene(o.scene);
  const auto start = std::chrono::steady_clock::now();
  const raster::HeadingRaster raster = raster::rasterize(scene, SpecFromOptions(o, scene.ego()));
  const auto elapsed = std::chrono::duration<double, std::milli>(
      std::chrono::steady_clock::now() - start);
  raster::WriteRaster(raster, o.out);
  out << "cells: " << raster.cell_count() << " (" << raster.width() << "x" << raster.height()
      << ")\n"
      << "wall time: " << Fixed(elapsed.count(), 1) << " ms\n"
      << "wrote " << o.out << " and " << raster::SidecarPath(o.out).string() << "\n";
  return kExitOk;
}

bool TouchesUnmappedCells(const geometry::Trajectory& gt, const geometry::Pose& ego,
                          const raster::HeadingRaster& raster) {
  for (const auto& p : gt.points()) {
    const auto kind = raster::query(raster, geometry::LocalToGlobal(p, ego)).kind;
    if (kind != raster::RasterLookup::Kind::kHeading) return true;
  }
  return false;
}

int CmdEval(const Options& o, std::ostream& out) {
  const std::vector<io::Sample> samples = io::LoadSamples(o.preds);
  const std::optional<scene::Scene> scene = OptionalScene(o);
  const raster::HeadingRaster raster = ObtainRaster(o, scene);
  if (samples.empty()) throw Error(ErrorCode::kEmptyBatch, o.preds + " holds no samples");

  std::vector<geometry::Trajectory> gts;
  if (!o.gt.empty()) {
    gts = io::GroundTruthFromJson(detail::ReadFile(o.gt),
                                  samples.front().preds.trajectories.front().dt(), o.gt);
    if (gts.size() != samples.size()) {
      throw Error(ErrorCode::kBatchShapeMismatch,
                  o.gt + " has " + std::to_string(gts.size()) + " samples, " + o.preds +
                      " has " + std::to_string(samples.size()));
    }
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!samples[i].gt) {
        throw Error(ErrorCode::kBatchShapeMismatch,
                    o.preds + ": sample " + std::to_string(i) +
                        " has no 'gt' and no --gt file was given");
      }
      gts.push_back(*samples[i].gt);
    }
  }

  std::vector<metrics::PredictionSet> kept;
  std::vector<geometry::Trajectory> kept_gts;
  std::vector<std::size_t> original_index;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (o.filter == "no-intersections" &&
        TouchesUnmappedCells(gts[i], samples[i].preds.ego, raster)) {
      continue;
    }
    kept.push_back(samples[i].preds);
    kept_gts.push_back(gts[i]);
    original_index.push_back(i);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyBatch, "filter '" + o.filter + "' excluded every sample");
  }
  if (!scene) throw Error(ErrorCode::kInvalidArgument, "eval needs --scene for off-road rate");

  metrics::EvalConfig config;
  config.alpha_deg = o.alpha;
  config.k_values = o.k_values;
  config.miss_threshold_m = o.miss_threshold;
  config.horizon_steps = o.horizon;
  const std::vector<const scene::Scene*> scenes(kept.size(), &*scene);
  const std::vector<const raster::HeadingRaster*> rasters(kept.size(), &raster);
  metrics::EvalReport report =
      metrics::evaluate_batch(kept, kept_gts, scenes, rasters, config);
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    report.samples[i].index = original_index[i];
  }

  detail::WriteFile(o.out + ".json", metrics::ReportToJson(report));
  detail::WriteFile(o.out + ".csv", metrics::ReportToCsv(report));

  const auto& a = report.aggregate;
  out << "samples: " << kept.size() << " evaluated, " << samples.size() - kept.size()
      << " filtered (" << o.filter << ")\n";
  std::ostringstream header, row;
  for (int k : config.k_values) {
    header << std::setw(10) << ("minADE_" + std::to_string(k));
    row << std::setw(10) << Fixed(a.min_ade.at(k));
  }
  for (int k : config.k_values) {
    header << std::setw(10) << ("minFDE_" + std::to_string(k));
    row << std::setw(10) << Fixed(a.min_fde.at(k));
  }
  for (int k : config.k_values) {
    header << std::setw(10) << ("MR_" + std::to_string(k) + "," + Fixed(o.miss_threshold, 0));
    row << std::setw(10) << Fixed(a.miss_rate.at(k));
  }
  header << std::setw(10) << "OffRoad" << std::setw(14) << "OffYaw[rad]";
  row << std::setw(10) << Fixed(a.off_road_rate) << std::setw(14) << Fixed(a.off_yaw_rate_rad);
  out << header.str() << "\n" << row.str() << "\n";
  out << "wrote " << o.out << ".json and " << o.out << ".csv\n";
  return kExitOk;
}

yawloss::LossConfig LossFromOptions(const Options& o) {
  yawloss::LossConfig cfg;
  cfg.alpha_deg = o.alpha;
  cfg.scale = o.scale;
  cfg.smooth_gate_width_deg = o.gate_width;
  return cfg;
}

int CmdGradcheck(const Options& o, std::ostream& out) {
  const std::vector<io::Sample> samples = io::LoadSamples(o.preds);
  const raster::HeadingRaster raster = ObtainRaster(o, OptionalScene(o));
  yawloss::GradCheckOptions gc;
  gc.h = o.h;
  gc.tolerance = o.tolerance;
  std::size_t checked = 0, passed = 0, excluded = 0;
  double max_rel = 0.0, max_abs = 0.0;
  for (const io::Sample& s : samples) {
    const yawloss::GradCheckReport r = yawloss::grad_check(s.preds, raster, LossFromOptions(o), gc);
    checked += r.checked;
    passed += r.passed;
    excluded += r.excluded;
    max_rel = std::max(max_rel, r.max_rel_error);
    max_abs = std::max(max_abs, r.max_abs_error);
  }
  out << passed << "/" << checked << " passed (" << excluded << " excluded)\n"
      << "max abs error: " << detail::FormatDouble(max_abs)
      << ", max rel error: " << detail::FormatDouble(max_rel) << "\n";
  return passed == checked ? kExitOk : kExitCheckFailed;
}

int CmdRefine(const Options& o, std::ostream& out) {
  std::vector<io::Sample> samples = io::LoadSamples(o.preds);
  const raster::HeadingRaster raster = ObtainRaster(o, OptionalScene(o));
  yawloss::RefineOptions ro;
  ro.anchor_weight = o.anchor_weight;
  ro.steps = o.steps;
  ro.lr = o.lr;
  ro.line_search = !o.no_line_search;
  std::vector<std::vector<yawloss::TraceRow>> traces;
  double initial = 0.0, final = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    yawloss::RefineResult r = yawloss::refine(samples[i].preds, raster, LossFromOptions(o), ro);
    initial += r.trace.front().yaw;
    final += r.trace.back().yaw;
    out << "sample " << i << ": yaw loss " << Fixed(r.trace.front().yaw, 6) << " -> "
        << Fixed(r.trace.back().yaw, 6) << " in " << r.trace.back().step << " steps\n";
    samples[i].preds = std::move(r.refined);
    traces.push_back(std::move(r.trace));
  }
  io::SaveSamples(samples, o.out + "_preds.json");
  detail::WriteFile(o.out + "_trace.csv", io::TraceToCsv(traces));
  const double ratio = initial > 0.0 ? final / initial : 0.0;
  out << "final/initial yaw loss ratio: " << Fixed(ratio, 6) << "\n"
      << "wrote " << o.out << "_preds.json and " << o.out << "_trace.csv\n";
  return kExitOk;
}

int CmdSynth(const Options& o, std::ostream& out) {
  scene::SyntheticSpec spec;
  if (o.kind == "straight") {
    scene::StraightRoadSpec road;
    road.headings_deg = o.headings;
    road.lane_width = o.lane_width;
    road.length = o.length;
    road.behind = o.length / 2.0;
    spec.road = road;
  } else if (o.kind == "arc") {
    scene::ArcRoadSpec road;
    road.radius = o.radius;
    road.span_deg = o.span;
    road.lane_width = o.lane_width;
    road.lanes = static_cast<int>(o.headings.size());
    spec.road = road;
  } else {
    scene::FourWaySpec road;
    road.leg_length = o.leg_length;
    road.lane_width = o.lane_width;
    spec.road = road;
  }
  const scene::Scene scene = scene::synth_scene(spec, o.seed);
  scene::UniformSource uniform(o.seed);

  std::vector<io::Sample> samples;
  std::vector<geometry::Trajectory> gts;
  for (std::size_t s = 0; s < o.samples; ++s) {
    const double step = o.step_length * (0.75 + 0.5 * uniform());
    const geometry::Trajectory gt =
        scene::FollowLanes(scene, scene.ego(), o.traj_steps, step, 0.0, o.dt);
    io::Sample sample;
    sample.preds.ego = scene.ego();
    double weight_sum = 0.0;
    for (std::size_t m = 0; m < o.modes; ++m) {
      if (o.fixture == "aligned") {
        // Mode 0 reproduces the ground truth; later modes vary the speed.
        sample.preds.trajectories.push_back(
            m == 0 ? gt
                   : scene::FollowLanes(scene, scene.ego(), o.traj_steps,
                                        step * (1.0 + 0.1 * static_cast<double>(m)),
                                        0.0, o.dt));
      } else if (o.fixture == "reversed") {
        sample.preds.trajectories.push_back(
            scene::FollowLanes(scene, scene.ego(), o.traj_steps, step, 180.0, o.dt));
      } else if (o.fixture == "wrongway") {
        // Ten degrees short of antipodal so the heading gradient is non-zero.
        sample.preds.trajectories.push_back(
            scene::FollowLanes(scene, scene.ego(), o.traj_steps, step, 170.0, o.dt));
      } else {
        const auto walk_seed = static_cast<std::uint64_t>(uniform() * 0x1.0p53);
        sample.preds.trajectories.push_back(
            scene::RandomWalk(walk_seed, o.traj_steps, 0.5 * step, 1.5 * step, o.dt));
      }
      const double w = static_cast<double>(o.modes - m);
      sample.preds.probabilities.push_back(w);
      weight_sum += w;
    }
    for (double& p : sample.preds.probabilities) p /= weight_sum;
    sample.gt = gt;
    samples.push_back(std::move(sample));
    gts.push_back(gt);
  }
  io::SaveScene(scene, o.out + "_scene.json");
  io::SaveSamples(samples, o.out + "_preds.json");
  detail::WriteFile(o.out + "_gt.json", io::GroundTruthToJson(gts));
  out << "wrote " << o.out << "_scene.json, " << o.out << "_preds.json and " << o.out
      << "_gt.json (" << o.samples << " samples x " << o.modes << " modes, " << o.fixture
      << ")\n";
  return kExitOk;
}

// Output prefixes are checked up front so a bad path fails before any work.
void RequireOutputDir(const std::string& out) {
  if (out.empty()) return;
  const fs::path parent = fs::path(out).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorCode::kIo, "output directory " + parent.string() + " does not exist");
  }
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"offyaw: lane-heading trajectory metrics, heading rasters and YawLoss"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", o.alpha, "off-yaw threshold in degrees")->capture_default_str();
    cmd->add_option("--resolution", o.resolution, "raster metres per pixel")
        ->capture_default_str();
    cmd->add_option("--extents", o.extents, "raster extents behind,ahead,left,right (m)")
        ->delimiter(',')
        ->expected(4);
    cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  };

  auto* rasterize = app.add_subcommand("rasterize", "build the heading raster of a scene");
  rasterize->add_option("--scene", o.scene, "scene JSON")->required()->check(CLI::ExistingFile);
  rasterize->add_option("--out", o.out, "output PGM path")->required();
  add_common(rasterize);

  auto* eval = app.add_subcommand("eval", "evaluate a prediction batch");
  eval->add_option("--preds", o.preds, "predictions JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", o.gt, "ground-truth JSON")->check(CLI::ExistingFile);
  eval->add_option("--scene", o.scene, "scene JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--raster", o.raster, "heading raster PGM")->check(CLI::ExistingFile);
  eval->add_option("--out", o.out, "output prefix for .json and .csv")->required();
  eval->add_option("--k", o.k_values, "k values")->delimiter(',');
  eval->add_option("--miss-threshold", o.miss_threshold, "miss distance (m)")
      ->capture_default_str();
  eval->add_option("--horizon", o.horizon, "prediction steps kept (0 = all)")
      ->capture_default_str();
  eval->add_option("--filter", o.filter, "none | no-intersections")
      ->check(CLI::IsMember({"none", "no-intersections"}));
  add_common(eval);

  auto add_loss = [&](CLI::App* cmd) {
    cmd->add_option("--preds", o.preds, "predictions JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scene", o.scene, "scene JSON")->check(CLI::ExistingFile);
    cmd->add_option("--raster", o.raster, "heading raster PGM")->check(CLI::ExistingFile);
    cmd->add_option("--scale", o.scale, "loss weight")->capture_default_str();
    cmd->add_option("--gate-width", o.gate_width, "smooth gate width (deg), 0 = hard")
        ->capture_default_str();
    add_common(cmd);
  };

  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and numeric gradients");
  add_loss(gradcheck);
  gradcheck->add_option("--fd-step", o.h, "finite-difference step (m)")->capture_default_str();
  gradcheck->add_option("--tol", o.tolerance, "relative tolerance")->capture_default_str();

  auto* refine = app.add_subcommand("refine", "gradient-descent refinement under YawLoss");
  add_loss(refine);
  refine->add_option("--out", o.out, "output prefix")->required();
  refine->add_option("--steps", o.steps, "descent steps")->capture_default_str();
  refine->add_option("--lr", o.lr, "initial step size")->capture_default_str();
  refine->add_option("--anchor-weight", o.anchor_weight, "weight of the displacement anchor")
      ->capture_default_str();
  refine->add_flag("--no-line-search", o.no_line_search, "take fixed steps");

  auto* synth = app.add_subcommand("synth", "write a synthetic scene and trajectory fixtures");
  synth->add_option("--kind", o.kind, "straight | arc | fourway")
      ->check(CLI::IsMember({"straight", "arc", "fourway"}));
  synth->add_option("--fixture", o.fixture, "aligned | reversed | wrongway | random")
      ->check(CLI::IsMember({"aligned", "reversed", "wrongway", "random"}));
  synth->add_option("--headings", o.headings, "lane headings (straight), lane count (arc)")
      ->delimiter(',');
  synth->add_option("--lane-width", o.lane_width)->capture_default_str();
  synth->add_option("--length", o.length, "straight road length (m)")->capture_default_str();
  synth->add_option("--radius", o.radius, "arc radius (m)")->capture_default_str();
  synth->add_option("--span", o.span, "arc span (deg)")->capture_default_str();
  synth->add_option("--leg-length", o.leg_length, "four-way leg length (m)")
      ->capture_default_str();
  synth->add_option("--samples", o.samples)->capture_default_str();
  synth->add_option("--modes", o.modes)->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--steps", o.traj_steps, "points per trajectory after the origin")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--step-length", o.step_length, "mean step length (m)")
      ->capture_default_str();
  synth->add_option("--dt", o.dt, "seconds per step")->capture_default_str();
  synth->add_option("--out", o.out, "output prefix")->required();
  add_common(synth);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    RequireOutputDir(o.out);
    if (rasterize->parsed()) return CmdRasterize(o, out);
    if (eval->parsed()) return CmdEval(o, out);
    if (gradcheck->parsed()) return CmdGradcheck(o, out);
    if (refine->parsed()) return CmdRefine(o, out);
    return CmdSynth(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace offyaw::cli

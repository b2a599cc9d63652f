// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. The funnel scene is passed as the first argument.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "lidarnav/config.hpp"
#include "lidarnav/error.hpp"
#include "lidarnav/metrics.hpp"
#include "lidarnav/pipeline.hpp"
#include "lidarnav/planar.hpp"
#include "lidarnav/preprocess.hpp"
#include "lidarnav/registration.hpp"
#include "lidarnav/report.hpp"
#include "lidarnav/sim.hpp"

using namespace lidarnav;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PointCloud bridge_scan_at(Rng& rng, std::uint64_t seed) {
  LocalPose pose;
  pose.x = uniform(rng, 60.0, 240.0);
  pose.y = uniform(rng, -2.0, 2.0);
  pose.yaw = uniform(rng, -0.1, 0.1);
  return raycast_scan(bundled_scene("bridge_crossing"), pose, LidarModel::hdl32(), seed);
}

Outcome rigid_estimator() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  int ok = 0;
  double worst_r = 0.0, worst_t = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Quaterniond q(Eigen::Vector4d(gaussian(rng), gaussian(rng), gaussian(rng),
                                               gaussian(rng)).normalized());
    RigidTransform truth;
    truth.rotation = q.toRotationMatrix();
    truth.translation = {uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -50, 50)};
    const std::size_t n = 10 + uniform_index(rng, 91);
    std::vector<Eigen::Vector3d> src, dst;
    for (std::size_t i = 0; i < n; ++i) {
      src.emplace_back(uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -20, 20));
      dst.push_back(truth.rotation * src.back() + truth.translation);
    }
    const RigidTransform est = estimate_rigid_transform(src, dst);
    const double er = (est.rotation - truth.rotation).norm();
    const double et = (est.translation - truth.translation).norm();
    worst_r = std::max(worst_r, er);
    worst_t = std::max(worst_t, et);
    ok += er <= 1e-9 && et <= 1e-9;
  }
  const double secs = seconds_since(start);
  return {ok == 1000 && secs < 10.0,
          fmt("%d/1000 exact, worst rotation %.2e, translation %.2e m, %.2f s", ok, worst_r,
              worst_t, secs)};
}

Outcome icp_monotonic() {
  Rng rng(2002);
  const RegistrationConfig cfg;
  int monotone = 0;
  std::size_t iterations = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const PointCloud scan = condition_scan(bridge_scan_at(rng, inst), PreprocessConfig{}).cloud;
    const RigidTransform t = transform_from_components(
        uniform(rng, -0.05, 0.05), uniform(rng, -0.01, 0.01), uniform(rng, -0.01, 0.01),
        {uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.1, 0.1)});
    PointCloud target = apply_transform(t, scan);
    for (auto& p : target.points) {
      p.x += 0.01 * gaussian(rng);
      p.y += 0.01 * gaussian(rng);
      p.z += 0.01 * gaussian(rng);
    }
    const IcpResult r = icp(scan, target, RigidTransform::identity(), cfg);
    bool ok = true;
    for (std::size_t i = 1; i < r.error_history.size(); ++i) {
      ok = ok && r.error_history[i] <= r.error_history[i - 1];
    }
    iterations += r.error_history.size();
    monotone += ok;
  }
  return {monotone == 100,
          fmt("%d/100 instances non-increasing over %zu iterations", monotone, iterations)};
}

Outcome full6d_recovery() {
  Rng rng(3003);
  const PreprocessConfig pre;
  RegistrationConfig reg;
  int ok = 0;
  double worst_yaw = 0.0, worst_t = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const PointCloud scan = bridge_scan_at(rng, 10000 + trial);
    const double r = 1.5 * std::sqrt(uniform01(rng)), phi = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const RigidTransform truth = transform_from_components(
        uniform(rng, -deg2rad(10.0), deg2rad(10.0)), 0.0, 0.0,
        {r * std::cos(phi), r * std::sin(phi), 0.0});
    reg.seed = static_cast<std::uint64_t>(trial);
    try {
      const RigidTransform est =
          register_scans(scan, apply_transform(truth, scan), pre, reg).motion.transform;
      const double dyaw = std::fabs(rad2deg(wrap_angle(decompose(est).yaw - decompose(truth).yaw)));
      const double dt = (est.translation - truth.translation).norm();
      worst_yaw = std::max(worst_yaw, dyaw);
      worst_t = std::max(worst_t, dt);
      ok += dyaw <= 0.5 && dt <= 0.1;
    } catch (const Error&) {
    }
  }
  return {ok >= 190, fmt("%d/200 within 0.5 deg and 0.1 m (need 190), worst %.3f deg, %.3f m",
                         ok, worst_yaw, worst_t)};
}

Outcome planar_recovery() {
  Rng rng(4004);
  const PlanarConfig cfg;
  const PreprocessConfig pre;
  const int max_k = static_cast<int>(std::floor(cfg.yaw_range / cfg.yaw_step + 1e-9));
  int ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const PointCloud scan = bridge_scan_at(rng, 20000 + trial);
    const int k = static_cast<int>(uniform_index(rng, 2 * max_k + 1)) - max_k;
    const int px = static_cast<int>(uniform_index(rng, 7)) - 3;
    const int py = static_cast<int>(uniform_index(rng, 7)) - 3;
    const PlanarMotion truth{k * cfg.yaw_step, px * cfg.canvas.resolution,
                             py * cfg.canvas.resolution, 0.0};
    try {
      const PlanarMotion m = match_planar(scan, apply_transform(truth.to_transform(), scan), cfg, pre);
      ok += std::fabs(m.yaw - truth.yaw) <= cfg.yaw_step / 2 && std::fabs(m.dx - truth.dx) < 1e-9 &&
            std::fabs(m.dy - truth.dy) < 1e-9;
    } catch (const Error&) {
    }
  }

  // Every circular shift with |dx|, |dy| <= 64 on a random 256 x 256 image.
  ProjectionCanvas canvas;
  ProjectionImage img = make_image(canvas);
  for (double& v : img.values) v = std::floor(uniform(rng, 0.0, 17.0));
  int shifts = 0, exact = 0;
  for (int dy = -64; dy <= 64; ++dy) {
    for (int dx = -64; dx <= 64; ++dx) {
      const PixelShift s = phase_correlate(img, circular_shift(img, dx, dy));
      ++shifts;
      exact += s.dx_px == dx && s.dy_px == dy;
    }
  }
  return {ok >= 190 && exact == shifts,
          fmt("match_planar %d/200 exact (need 190); phase_correlate %d/%d shifts exact", ok,
              exact, shifts)};
}

Outcome relative_throughput(const fs::path& funnel) {
  SimOptions opts;
  opts.scan_period = 0.5;
  // 101 scans from x = 12 to x = 140.
  const SimRun run(read_scene(funnel), straight_trajectory(12.0, 0.0, 0.0, 2.56, 0.0, 50.25),
                   LidarModel::hdl32(), {}, 5005, opts);
  std::size_t lo = SIZE_MAX, hi = 0;
  for (std::size_t i = 0; i < run.scan_count(); ++i) {
    const std::size_t n = run.scan(i).size();
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  const ScanSequence seq = make_sequence(run);
  const PipelineConfig cfg;
  const BenchReport full = benchmark(seq, Method::kFull6d, cfg, 3);
  const BenchReport planar = benchmark(seq, Method::kPlanar, cfg, 3);
  const double ratio = planar.end_to_end_hz / full.end_to_end_hz;
  const bool envelope = lo >= 6000 && hi <= 27000 && full.pairs.size() == 100;
  return {envelope && ratio >= 3.0 && full.bucket_spearman > 0.8,
          fmt("%zu pairs, %zu-%zu points; planar %.2f Hz, full6d %.2f Hz (x%.2f, need 3); "
              "full6d bucket rho %.3f (need > 0.8)",
              full.pairs.size(), lo, hi, planar.end_to_end_hz, full.end_to_end_hz, ratio,
              full.bucket_spearman)};
}

Outcome operating_envelope() {
  const PreprocessConfig pre;
  const RegistrationConfig reg;
  Rng rng(6006);
  PointCloud sparse = bridge_scan_at(rng, 1);
  sparse.points.resize(pre.min_points - 1);
  bool refused = false;
  try {
    register_scans(sparse, sparse, pre, reg);
  } catch (const Error& e) {
    refused = e.code() == ErrorCode::kBelowMinPoints;
  }

  int inside = 0, total = 0;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& name : bundled_scene_names()) {
    const Scene scene = bundled_scene(name);
    for (double x = -80.0; x <= 380.0; x += 10.0) {
      LocalPose pose;
      pose.x = x;
      // Nearest structure: a primitive face within 30 m of the sensor.
      bool near = false;
      for (const auto& p : scene.primitives) {
        const double ex = std::max(0.0, std::fabs(x - p.center.x()) - 0.5 * p.size.x());
        const double ey = std::max(0.0, std::fabs(p.center.y()) - 0.5 * p.size.y());
        near = near || std::hypot(ex, ey) <= 30.0;
      }
      if (!near) continue;
      const std::size_t n = raycast_scan(scene, pose, LidarModel::hdl32(), 600 + total).size();
      ++total;
      inside += n >= 6000 && n <= 27000;
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
  }
  return {refused && inside == total && total > 0,
          fmt("BelowMinPoints %s; %d/%d near-structure scans in 6k-27k (range %zu-%zu)",
              refused ? "raised" : "NOT raised", inside, total, lo, hi)};
}

Outcome outlier_envelope() {
  const PreprocessConfig pre;
  double worst = 0.0;
  int scans = 0;
  for (const auto& name : bundled_scene_names()) {
    const Scene scene = bundled_scene(name);
    for (double x = 0.0; x <= 300.0; x += 25.0) {
      LocalPose pose;
      pose.x = x;
      const PointCloud c = raycast_scan(scene, pose, LidarModel::hdl32(), 700 + scans);
      if (c.size() == 0) continue;  // open water
      const PointCloud kept = remove_statistical_outliers(c, pre.sor_k, pre.sor_stddev_mult);
      worst = std::max(worst, 1.0 - static_cast<double>(kept.size()) / c.size());
      ++scans;
    }
  }
  return {worst < 0.10 && scans > 0,
          fmt("worst discard %.2f%% over %d scans", 100.0 * worst, scans)};
}

struct GapResult {
  Outcome outcome;
  double odometry_drift = 0.0;
};

GapResult gap_filling() {
  AppConfig app;
  app.sim.scene = "bridge_crossing";
  app.sim.start_x = 110.0;
  app.sim.duration = 40.0;
  app.sim.speed = 2.0;
  app.sim.seed = 8008;
  app.sim.gps.blackouts.push_back({5.0, 35.0});
  app.pipeline.method = Method::kPlanar;
  const SimRun run(app.sim.load_scene(), app.sim.trajectory(), app.sim.lidar_model(),
                   app.sim.gps, app.sim.seed, app.sim.options);
  const auto start = std::chrono::steady_clock::now();
  const RunReport rep = run_pipeline(make_sequence(run), app.pipeline);
  const double secs = seconds_since(start);

  const double max_speed = app.pipeline.fusion.max_speed;
  double worst_excess = -1.0;
  for (std::size_t i = 1; i < rep.trajectory.size(); ++i) {
    const LocalPose& a = rep.trajectory[i - 1];
    const LocalPose& b = rep.trajectory[i];
    const double step = std::hypot(b.x - a.x, b.y - a.y);
    worst_excess = std::max(worst_excess, step - (max_speed * (b.t - a.t) + 0.01));
  }
  // Last output before the first fix after the blackout.
  double gap_error = 1e9;
  for (const auto& p : rep.trajectory) {
    if (p.t > 35.0) break;
    const LocalPose truth = interpolate_pose(rep.truth, p.t);
    gap_error = std::hypot(p.x - truth.x, p.y - truth.y);
  }
  GapResult r;
  r.odometry_drift = rep.odometry_metrics.final_yaw_drift;
  r.outcome = {worst_excess <= 0.0 && gap_error <= 2.0 && secs < 60.0,
               fmt("largest step excess %.4f m (need <= 0), end-of-gap error %.3f m (need <= 2), "
                   "%.1f s (need < 60)",
                   std::max(worst_excess, 0.0), gap_error, secs)};
  return r;
}

Outcome multipath_rejection() {
  AppConfig app;
  app.sim.scene = "bridge_crossing";
  app.sim.start_x = 110.0;
  app.sim.duration = 40.0;
  app.sim.seed = 9009;
  app.sim.gps.multipath.push_back({10.0, 30.0, 8.0, 20.0});
  app.pipeline.method = Method::kPlanar;
  const SimRun run(app.sim.load_scene(), app.sim.trajectory(), app.sim.lidar_model(),
                   app.sim.gps, app.sim.seed, app.sim.options);
  const RunReport rep = run_pipeline(make_sequence(run), app.pipeline);
  double gps = 0.0, fused = 0.0;
  for (const auto& p : rep.gps_track) {
    if (p.t < 10.0 || p.t > 30.0) continue;
    const LocalPose truth = interpolate_pose(rep.truth, p.t);
    gps = std::max(gps, std::hypot(p.x - truth.x, p.y - truth.y));
  }
  for (const auto& p : rep.trajectory) {
    if (p.t < 10.0 || p.t > 30.0) continue;
    const LocalPose truth = interpolate_pose(rep.truth, p.t);
    fused = std::max(fused, std::hypot(p.x - truth.x, p.y - truth.y));
  }
  return {fused < 0.5 * gps,
          fmt("max deviation in window: GPS %.2f m, fused %.2f m (need < %.2f)", gps, fused,
              0.5 * gps)};
}

Outcome drift_harness(double synthetic_drift) {
  std::vector<LocalPose> truth, est;
  LocalPose t, e;
  for (int i = 0; i <= 200; ++i) {
    t.t = e.t = 0.1 * i;
    truth.push_back(t);
    est.push_back(e);
    t = integrate_odometry(t, {0.0, 0.2, 0.0, 1.0});
    e = integrate_odometry(e, {deg2rad(0.1), 0.2, 0.0, 1.0});
  }
  const double drift = compute_metrics(est, truth).final_yaw_drift;
  return {std::fabs(drift - 20.0) <= 1e-6,
          fmt("constructed drift %.9f deg; bridge run odometry drift %.3f deg (logged)", drift,
              synthetic_drift)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "lidarnav_acceptance_determinism";
  fs::remove_all(root);
  AppConfig app;
  app.sim.start_x = 130.0;
  app.sim.duration = 3.0;
  app.sim.seed = 1111;
  app.sim.gps.blackouts.push_back({1.0, 2.0});
  write_dataset(root / "data", SimRun(app.sim.load_scene(), app.sim.trajectory(),
                                      app.sim.lidar_model(), app.sim.gps, app.sim.seed,
                                      app.sim.options));
  int files = 0, same = 0;
  for (Method m : {Method::kFull6d, Method::kPlanar}) {
    PipelineConfig cfg;
    cfg.method = m;
    cfg.seed = 77;
    for (const char* out : {"a", "b"}) {
      write_run_outputs(root / method_name(m) / out, run_pipeline(root / "data", cfg));
    }
    const fs::path a = root / method_name(m) / "a";
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path name = entry.path().filename();
      // timing.csv holds wall-clock measurements.
      if (name.extension() != ".csv" || name == "timing.csv") continue;
      ++files;
      same += slurp(entry.path()) == slurp(root / method_name(m) / "b" / name);
    }
  }
  fs::remove_all(root);
  return {files > 0 && same == files,
          fmt("%d/%d CSV files byte-identical across two runs (timing.csv excluded)", same, files)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <funnel.scene>\n", argv[0]);
    return 2;
  }
  const fs::path funnel = argv[1];
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2d %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  };

  double drift = 0.0;
  report(1, "rigid estimator oracle", rigid_estimator);
  report(2, "ICP monotonicity", icp_monotonic);
  report(3, "full6d recovery", full6d_recovery);
  report(4, "planar recovery", planar_recovery);
  report(5, "relative throughput", [&] { return relative_throughput(funnel); });
  report(6, "operating envelope", operating_envelope);
  report(7, "outlier filter envelope", outlier_envelope);
  report(8, "gap filling", [&] {
    GapResult g = gap_filling();
    drift = g.odometry_drift;
    return g.outcome;
  });
  report(9, "multipath rejection", multipath_rejection);
  report(10, "drift harness", [&] { return drift_harness(drift); });
  report(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

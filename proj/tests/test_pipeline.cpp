// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "lidarnav/config.hpp"
#include "lidarnav/error.hpp"
#include "lidarnav/pipeline.hpp"
#include "lidarnav/report.hpp"
#include "lidarnav/sim.hpp"
#include "test_util.hpp"

using namespace lidarnav;

namespace {

PipelineConfig planar_config() {
  PipelineConfig cfg;
  cfg.method = Method::kPlanar;
  return cfg;
}

SimRun short_run(double seconds, std::uint64_t seed = 3) {
  return SimRun(bundled_scene("bridge_crossing"),
                straight_trajectory(135.0, 0.0, 0.0, 2.0, 0.0, seconds), LidarModel::hdl32(), {},
                seed);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("motion algebra") {
  const PlanarMotion a{0.3, 1.0, -0.5, 1.0}, b{-0.1, 0.2, 0.7, 1.0};
  const PlanarMotion ab = compose_motion(a, b);
  const RigidTransform t = compose(a.to_transform(), b.to_transform());
  CHECK(ab.dx == doctest::Approx(t.translation.x()));
  CHECK(ab.dy == doctest::Approx(t.translation.y()));
  CHECK(ab.yaw == doctest::Approx(0.2));
  const PlanarMotion id = compose_motion(a, invert_motion(a));
  CHECK(std::fabs(id.yaw) < 1e-12);
  CHECK(std::hypot(id.dx, id.dy) < 1e-12);
}

TEST_CASE("repeated scan gives identity motions and no drift") {
  const SimRun run = short_run(1.0);
  const PointCloud scan = run.scan(0);
  ScanSequence seq;
  for (int i = 0; i < 6; ++i) seq.stamps.push_back(0.1 * i);
  seq.load = [&](std::size_t) { return scan; };
  for (Method m : {Method::kPlanar, Method::kFull6d}) {
    PipelineConfig cfg;
    cfg.method = m;
    const RunReport r = run_pipeline(seq, cfg);
    REQUIRE(r.per_pair.size() == 5);
    for (const auto& p : r.per_pair) {
      CHECK(p.status == PairStatus::kMatched);
      CHECK(std::fabs(p.motion.yaw) < 1e-9);
      CHECK(std::hypot(p.motion.dx, p.motion.dy) < 1e-6);
    }
    CHECK(std::hypot(r.odometry.back().x, r.odometry.back().y) < 1e-6);
  }
}

TEST_CASE("anomalous scan is flagged and bridged") {
  const SimRun run = short_run(1.5);
  ScanSequence seq = make_sequence(run);
  const auto inner = seq.load;
  seq.load = [inner](std::size_t i) {
    PointCloud c = inner(i);
    if (i == 6) {
      PointCloud thin;
      for (std::size_t k = 0; k < c.size(); k += 10) thin.points.push_back(c.points[k]);
      return thin;
    }
    return c;
  };
  const RunReport r = run_pipeline(seq, planar_config());
  const PairRecord& bad = r.per_pair.at(5);
  CHECK(bad.status == PairStatus::kBridged);
  CHECK(bad.failure == "AnomalousScan");
  // Constant velocity: the bridged step matches its predecessor.
  CHECK(bad.motion.dx == doctest::Approx(r.per_pair.at(4).motion.dx));
  // The odometry still tracks the truth closely.
  const LocalPose& end = r.odometry.back();
  CHECK(std::fabs(end.x - (r.truth.back().x - r.truth.front().x)) < 0.5);
}

TEST_CASE("pipeline is deterministic") {
  const SimRun run = short_run(1.0, 8);
  PipelineConfig cfg;
  cfg.seed = 99;
  const RunReport a = run_pipeline(make_sequence(run), cfg);
  const RunReport b = run_pipeline(make_sequence(run), cfg);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  std::ostringstream ta, tb, pa, pb;
  write_trajectory_csv(ta, a.trajectory);
  write_trajectory_csv(tb, b.trajectory);
  write_per_pair_csv(pa, a);
  write_per_pair_csv(pb, b);
  CHECK(ta.str() == tb.str());
  CHECK(pa.str() == pb.str());
}

TEST_CASE("pipeline argument and data errors") {
  const SimRun run = short_run(1.0);
  ScanSequence one = make_sequence(run);
  one.stamps.resize(1);
  CHECK_THROWS_AS(run_pipeline(one, planar_config()), Error);

  ScanSequence broken = make_sequence(run);
  broken.gps_source = "gps.log";
  broken.gps.push_back({0.45, "$GPGGA,garbage*00"});
  try {
    run_pipeline(broken, planar_config());
    FAIL("bad GPS line accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == static_cast<int>(broken.gps.size()));
  }
  CHECK_THROWS_AS(run_pipeline(std::filesystem::path("/nonexistent/dataset"), planar_config()),
                  Error);
}

TEST_CASE("dataset run writes every output") {
  const auto data = test::scratch_dir("pipeline_ds");
  GpsCorruptionModel gps;
  gps.blackouts.push_back({1.0, 2.0});
  write_dataset(data, SimRun(bundled_scene("bridge_crossing"),
                             straight_trajectory(140.0, 0.0, 0.0, 2.0, 0.0, 3.0),
                             LidarModel::hdl32(), gps, 4));
  const RunReport r = run_pipeline(data, planar_config());
  CHECK(r.has_metrics);
  CHECK(r.fused_metrics.ate_rmse < 1.0);

  const auto out = test::scratch_dir("pipeline_out");
  write_run_outputs(out, r);
  for (const char* name : {"trajectory.csv", "per_pair.csv", "metrics.csv", "timing.csv",
                           "trajectory.svg", "yaw.svg", "drift.svg"}) {
    CAPTURE(name);
    CHECK(std::filesystem::file_size(out / name) > 0);
  }
  CHECK(slurp(out / "trajectory.csv").rfind("t,x,y,yaw,source\n", 0) == 0);

  const auto back = read_trajectory_csv(out / "trajectory.csv");
  REQUIRE(back.size() == r.trajectory.size());
  CHECK(back.back().x == doctest::Approx(r.trajectory.back().x).epsilon(1e-6));

  std::ofstream(out / "broken.csv") << "t,x,y,yaw\n0,0,0,0\n0.1,1,oops,0\n";
  try {
    read_trajectory_csv(out / "broken.csv");
    FAIL("bad row accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("benchmark buckets") {
  const SimRun run = short_run(0.5);
  const BenchReport b = benchmark(make_sequence(run), Method::kPlanar, planar_config(), 3);
  CHECK(b.repetitions == 3);
  CHECK(b.pairs.size() == run.scan_count() - 1);
  for (const auto& p : b.pairs) CHECK(p.min_total <= p.mean.total);
  CHECK(b.end_to_end_hz > 0.0);
  const auto edges = bench_bucket_edges();
  CHECK(edges.front() == 0);
  CHECK(edges[1] == 6000);
}

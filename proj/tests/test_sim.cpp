// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "lidarnav/error.hpp"
#include "lidarnav/nmea.hpp"
#include "lidarnav/preprocess.hpp"
#include "lidarnav/sim.hpp"
#include "test_util.hpp"

using namespace lidarnav;

namespace {

LidarModel single_beam() {
  LidarModel m;
  m.beam_elevations = {0.0};
  m.azimuth_step = 2.0 * std::numbers::pi;  // one azimuth, pointing along +x
  m.range_noise_sigma = 0.0;
  m.dropout_prob = 0.0;
  return m;
}

Primitive wall_box(double x, double y, double lx, double ly) {
  Primitive p;
  p.kind = PrimitiveKind::kPillar;
  p.center = {x, y, 5.0};
  p.size = {lx, ly, 10.0};
  p.reflectivity = 0.25;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("scene text round trip") {
  const Scene s = bundled_scene("bridge_crossing");
  std::stringstream ss;
  write_scene(ss, s);
  const Scene r = read_scene(ss);
  REQUIRE(r.primitives.size() == s.primitives.size());
  for (std::size_t i = 0; i < s.primitives.size(); ++i) {
    CHECK(r.primitives[i].kind == s.primitives[i].kind);
    CHECK((r.primitives[i].center - s.primitives[i].center).norm() < 1e-9);
    CHECK((r.primitives[i].size - s.primitives[i].size).norm() < 1e-9);
  }

  std::istringstream bad("# comment\n\nWALL 0 0 0 0 1 1 1 0.5\nTOWER 1 2 3 0 1 1 1 0.5\n");
  try {
    read_scene(bad, "bad.scene");
    FAIL("unknown kind accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == 4);
  }
  std::istringstream negative("PILLAR 0 0 1 0 -1 1 1 0.5\n");
  CHECK_THROWS_AS(read_scene(negative), Error);
}

TEST_CASE("raycast geometry") {
  const LidarModel beam = single_beam();
  LocalPose origin;

  SUBCASE("wall ahead") {
    Scene s;
    s.primitives.push_back(wall_box(10.5, 0.0, 1.0, 20.0));  // near face at x = 10
    const PointCloud c = raycast_scan(s, origin, beam, 1);
    REQUIRE(c.size() == 1);
    CHECK(c.points[0].x == doctest::Approx(10.0));
    CHECK(c.points[0].y == doctest::Approx(0.0));
    CHECK(c.points[0].z == doctest::Approx(0.0));
    CHECK(c.points[0].intensity == doctest::Approx(0.25));
  }

  SUBCASE("nearer pillar occludes the farther one") {
    Scene s;
    s.primitives.push_back(wall_box(20.0, 0.0, 2.0, 2.0));
    s.primitives.push_back(wall_box(8.0, 0.0, 2.0, 2.0));
    const PointCloud c = raycast_scan(s, origin, beam, 1);
    REQUIRE(c.size() == 1);
    CHECK(c.points[0].x == doctest::Approx(7.0));
  }

  SUBCASE("heading rotates the sensor frame") {
    Scene s;
    s.primitives.push_back(wall_box(0.0, 10.5, 20.0, 1.0));
    LocalPose north;
    north.yaw = std::numbers::pi / 2;
    const PointCloud c = raycast_scan(s, north, beam, 1);
    REQUIRE(c.size() == 1);
    CHECK(c.points[0].x == doctest::Approx(10.0));
    CHECK(std::fabs(c.points[0].y) < 1e-9);
  }

  SUBCASE("open water returns nothing") {
    const PointCloud c = raycast_scan(bundled_scene("open_water"), origin, LidarModel::hdl32(), 3);
    CHECK(c.size() == 0);
  }

  SUBCASE("no point sits on the water plane") {
    const LidarModel m = LidarModel::hdl32();
    LocalPose p;
    p.x = 150.0;
    const PointCloud c = raycast_scan(bundled_scene("bridge_crossing"), p, m, 4);
    for (const auto& q : c.points) {
      // Sensor frame z = world z - mount height; noise is at most a few sigma.
      CHECK(q.z + m.mount_height > -5.0 * m.range_noise_sigma);
    }
  }
}

TEST_CASE("bundled scenes") {
  const PreprocessConfig pre;
  for (const auto& name : bundled_scene_names()) {
    CAPTURE(name);
    const Scene s = bundled_scene(name);
    s.validate();
    if (name == "open_water") continue;
    for (double x : {60.0, 120.0, 150.0, 200.0}) {
      LocalPose p;
      p.x = x;
      const PointCloud c = raycast_scan(s, p, LidarModel::hdl32(), 11);
      CHECK(c.size() >= 6000);
      CHECK(c.size() <= 27000);
      const PointCloud kept = remove_statistical_outliers(c, pre.sor_k, pre.sor_stddev_mult);
      CHECK(static_cast<double>(c.size() - kept.size()) < 0.1 * c.size());
    }
  }
  CHECK_THROWS_AS(bundled_scene("ocean"), Error);
}

TEST_CASE("simulate_run") {
  const Scene scene = bundled_scene("canal_walls");
  const auto traj = straight_trajectory(100.0, 0.0, 0.0, 2.0, 0.0, 10.0);

  SUBCASE("clean run") {
    GpsCorruptionModel gps;
    const SimDataset d = simulate_run(scene, traj, LidarModel::hdl32(), gps, 1);
    CHECK(d.scans.size() == 100);
    CHECK(d.truth.size() == 100);
    REQUIRE(d.gps_log.size() == 10);
    for (const auto& e : d.gps_log) {
      const GpsFix f = parse_nmea_gga(e.sentence);
      const Eigen::Vector2d xy = geodetic_to_local(f, gps.reference);
      const LocalPose truth = interpolate_pose(traj, e.t);
      CHECK((xy - truth.xy()).norm() < 3.0 * std::sqrt(2.0) * gps.base_noise_sigma);
      CHECK(f.hdop == doctest::Approx(gps.base_hdop));
    }
  }

  SUBCASE("blackout drops exactly the fixes inside the window") {
    GpsCorruptionModel gps;
    gps.blackouts.push_back({4.0, 7.0});
    const SimDataset d = simulate_run(scene, traj, LidarModel::hdl32(), gps, 1);
    std::vector<double> times;
    for (const auto& e : d.gps_log) times.push_back(e.t);
    CHECK(times == std::vector<double>{0, 1, 2, 3, 8, 9});
  }

  SUBCASE("multipath bias stays within the amplitude at base HDOP") {
    GpsCorruptionModel gps;
    gps.multipath.push_back({0.0, 10.0, 8.0, 20.0});
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const LocalPose truth = interpolate_pose(traj, i);
      const GpsFix f = parse_nmea_gga(*corrupt_gps(truth, i, gps, rng));
      const double err = (geodetic_to_local(f, gps.reference) - truth.xy()).norm();
      CHECK(err <= 8.0 + 0.01);
      CHECK(f.hdop == doctest::Approx(gps.base_hdop));
      worst = std::max(worst, err);
    }
    CHECK(worst > 7.9);
  }

  SUBCASE("noiseless fix re-parses to the truth") {
    GpsCorruptionModel gps;
    gps.base_noise_sigma = 0.0;
    Rng rng(2);
    LocalPose truth;
    truth.x = 1234.5;
    truth.y = -321.25;
    const GpsFix f = parse_nmea_gga(*corrupt_gps(truth, 3.0, gps, rng));
    CHECK((geodetic_to_local(f, gps.reference) - truth.xy()).norm() < 0.01);
  }

  SUBCASE("empty or reversed trajectory") {
    GpsCorruptionModel gps;
    CHECK_THROWS_AS(simulate_run(scene, {}, LidarModel::hdl32(), gps, 1), Error);
    auto reversed = traj;
    std::swap(reversed.front(), reversed.back());
    CHECK_THROWS_AS(simulate_run(scene, reversed, LidarModel::hdl32(), gps, 1), Error);
  }
}

TEST_CASE("lazy scans match the materialized run") {
  const auto traj = straight_trajectory(130.0, 0.0, 0.0, 2.0, 0.0, 1.0);
  const SimRun run(bundled_scene("bridge_crossing"), traj, LidarModel::hdl32(), {}, 5);
  const PointCloud late = run.scan(7);
  const PointCloud early = run.scan(2);
  const SimDataset d = run.materialize();
  REQUIRE(d.scans[7].size() == late.size());
  CHECK(d.scans[2].size() == early.size());
  for (std::size_t i = 0; i < late.size(); ++i) CHECK(d.scans[7].points[i].x == late.points[i].x);
}

TEST_CASE("dataset files are deterministic") {
  const auto traj = straight_trajectory(120.0, 0.0, 0.0, 2.0, 0.0, 1.5);
  GpsCorruptionModel gps;
  gps.blackouts.push_back({0.5, 0.9});
  const SimRun run(bundled_scene("lock"), traj, LidarModel::hdl32(), gps, 42);
  const auto a = test::scratch_dir("sim_a");
  const auto b = test::scratch_dir("sim_b");
  write_dataset(a, run);
  write_dataset(b, SimRun(bundled_scene("lock"), traj, LidarModel::hdl32(), gps, 42));
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a);
    CAPTURE(rel.string());
    CHECK(slurp(entry.path()) == slurp(b / rel));
  }

  const DatasetReader reader(a);
  CHECK(reader.scan_count() == run.scan_count());
  CHECK(reader.seed() == 42);
  REQUIRE(reader.reference().has_value());
  CHECK(reader.reference()->latitude == doctest::Approx(gps.reference.latitude));
  CHECK(reader.scan(3).size() == run.scan(3).size());
  for (const auto& e : reader.gps_log()) CHECK_NOTHROW(parse_nmea_gga(e.sentence));

  CHECK_THROWS_AS(DatasetReader(a / "missing"), Error);
}

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "doctest.h"
#include "lidarnav/error.hpp"
#include "lidarnav/navfusion.hpp"
#include "lidarnav/random.hpp"

using namespace lidarnav;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// WGS-84 radii written out from the ellipsoid constants.
double meridian_radius(double lat_deg) {
  const double a = 6378137.0, f = 1.0 / 298.257223563, e2 = f * (2.0 - f);
  const double s = std::sin(lat_deg * kDeg);
  return a * (1.0 - e2) / std::pow(1.0 - e2 * s * s, 1.5);
}
double normal_radius(double lat_deg) {
  const double a = 6378137.0, f = 1.0 / 298.257223563, e2 = f * (2.0 - f);
  const double s = std::sin(lat_deg * kDeg);
  return a / std::sqrt(1.0 - e2 * s * s);
}

const GeoReference kRef{45.0, 15.0};

GpsFix fix_at(double x, double y, double hdop = 0.9, int quality = 1) {
  const GeoReference g = local_to_geodetic({x, y}, kRef);
  GpsFix f;
  f.latitude = g.latitude;
  f.longitude = g.longitude;
  f.hdop = hdop;
  f.fix_quality = quality;
  f.satellites = 10;
  return f;
}

}  // namespace

TEST_CASE("geodetic_to_local") {
  const GeoReference ref{42.0, 10.0};
  const Eigen::Vector2d origin = geodetic_to_local(42.0, 10.0, ref);
  CHECK(origin.norm() == 0.0);

  const Eigen::Vector2d north = geodetic_to_local(42.0 + 1e-5, 10.0, ref);
  CHECK(north.y() == doctest::Approx(1.11).epsilon(0.01 / 1.11));
  CHECK(north.y() == doctest::Approx(1e-5 * kDeg * meridian_radius(42.0)).epsilon(1e-9));
  CHECK(north.x() == 0.0);

  const Eigen::Vector2d east = geodetic_to_local(42.0, 10.0 + 1e-5, ref);
  CHECK(east.x() == doctest::Approx(0.83).epsilon(0.01 / 0.83));
  CHECK(east.x() ==
        doctest::Approx(1e-5 * kDeg * normal_radius(42.0) * std::cos(42.0 * kDeg)).epsilon(1e-9));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d xy(uniform(rng, -5000, 5000), uniform(rng, -5000, 5000));
    const GeoReference g = local_to_geodetic(xy, ref);
    CHECK((geodetic_to_local(g.latitude, g.longitude, ref) - xy).norm() < 1e-6);
  }
}

TEST_CASE("integrate_odometry") {
  LocalPose p;
  LocalPose q = integrate_odometry(p, {0.0, 1.0, 0.0, 1.0});
  CHECK(q.x == doctest::Approx(1.0));
  CHECK(q.y == doctest::Approx(0.0));
  CHECK(q.source == PoseSource::kLidar);

  p.yaw = 90.0 * kDeg;
  q = integrate_odometry(p, {0.0, 1.0, 0.0, 1.0});
  CHECK(q.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.y == doctest::Approx(1.0));
  CHECK(q.yaw == doctest::Approx(90.0 * kDeg));

  // Yaw wraps into (-pi, pi].
  p.yaw = 170.0 * kDeg;
  q = integrate_odometry(p, {20.0 * kDeg, 0.0, 0.0, 1.0});
  CHECK(q.yaw == doctest::Approx(-170.0 * kDeg));

  SUBCASE("chain matches composed transforms") {
    Rng rng(5);
    LocalPose pose;
    RigidTransform acc = RigidTransform::identity();
    for (int i = 0; i < 50; ++i) {
      const PlanarMotion m{uniform(rng, -0.2, 0.2), uniform(rng, -1, 2), uniform(rng, -0.5, 0.5), 1.0};
      pose = integrate_odometry(pose, m);
      acc = compose(acc, m.to_transform());
    }
    CHECK(pose.x == doctest::Approx(acc.translation.x()).epsilon(1e-9));
    CHECK(pose.y == doctest::Approx(acc.translation.y()).epsilon(1e-9));
    CHECK(std::cos(pose.yaw) == doctest::Approx(acc.rotation(0, 0)).epsilon(1e-9));
    CHECK(std::sin(pose.yaw) == doctest::Approx(acc.rotation(1, 0)).epsilon(1e-9));
  }
}

TEST_CASE("vehicle_motion_from_registration") {
  // The scene as seen after moving forward 1 m appears shifted back by 1 m.
  const RigidTransform scan = transform_from_components(0.0, 0.0, 0.0, {-1.0, 0.0, 0.0});
  const PlanarMotion m = vehicle_motion_from_registration(scan);
  CHECK(m.dx == doctest::Approx(1.0));
  CHECK(m.dy == doctest::Approx(0.0));
  CHECK(m.yaw == doctest::Approx(0.0));
}

TEST_CASE("gps_validity") {
  FusionConfig cfg;
  CHECK(gps_validity(std::nullopt, std::nullopt, cfg, kRef) == GpsTrust::kLost);
  CHECK(gps_validity(fix_at(0, 0, 0.9, 0), std::nullopt, cfg, kRef) == GpsTrust::kLost);
  CHECK(gps_validity(fix_at(0, 0, 5.0), std::nullopt, cfg, kRef) == GpsTrust::kSuspect);
  CHECK(gps_validity(fix_at(0, 0, 0.9), std::nullopt, cfg, kRef) == GpsTrust::kTrusted);

  LocalPose predicted;
  predicted.x = 30.0;
  CHECK(gps_validity(fix_at(0, 0), predicted, cfg, kRef) == GpsTrust::kSuspect);
  predicted.x = 4.0;
  CHECK(gps_validity(fix_at(0, 0), predicted, cfg, kRef) == GpsTrust::kTrusted);
  CHECK(gps_validity(fix_at(0, 0), predicted, cfg, kRef, 3.0) == GpsTrust::kSuspect);

  // Same inputs, same verdict.
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    predicted.x = uniform(rng, -10, 10);
    const GpsFix f = fix_at(uniform(rng, -10, 10), 0.0, uniform(rng, 0.5, 3.0));
    CHECK(gps_validity(f, predicted, cfg, kRef) == gps_validity(f, predicted, cfg, kRef));
  }
}

TEST_CASE("fuse_step") {
  FusionConfig cfg;

  SUBCASE("trusted stream reproduces the GPS track") {
    FusedState s;
    for (int i = 0; i < 20; ++i) {
      const double t = i;
      s = fuse_step(s, t, fix_at(2.0 * i, 0.5 * i), PlanarMotion{0.0, 2.0, 0.5, 1.0}, cfg, kRef);
      CHECK(s.pose.x == doctest::Approx(2.0 * i).epsilon(1e-9));
      CHECK(s.pose.y == doctest::Approx(0.5 * i).epsilon(1e-9));
      CHECK(s.pose.source == PoseSource::kGps);
    }
  }

  SUBCASE("blackout is bridged without steps and noiseless odometry ends exact") {
    FusedState s;
    const double dt = 0.1, speed = 2.0;
    double prev_x = 0.0, prev_t = 0.0;
    bool first = true;
    for (int i = 0; i <= 600; ++i) {
      const double t = i * dt;
      const bool gps_epoch = i % 10 == 0;
      const bool blackout = t > 10.0 && t < 40.0;
      std::optional<GpsFix> gps;
      if (gps_epoch && !blackout) gps = fix_at(speed * t, 0.0);
      std::optional<PlanarMotion> odom;
      if (i > 0) odom = PlanarMotion{0.0, speed * dt, 0.0, 1.0};
      s = fuse_step(s, t, gps, odom, cfg, kRef);
      if (!first) {
        CHECK(std::fabs(s.pose.x - prev_x) <= cfg.max_speed * (t - prev_t) + 1e-9);
      }
      if (blackout && t > 12.0) CHECK(s.pose.source == PoseSource::kLidar);
      CHECK(std::fabs(s.pose.x - speed * t) < 1e-6);
      first = false;
      prev_x = s.pose.x;
      prev_t = t;
    }
    CHECK(s.pose.source == PoseSource::kGps);
  }

  SUBCASE("recovery blends out a discrepancy monotonically") {
    FusedState s;
    s = fuse_step(s, 0.0, fix_at(0, 0), std::nullopt, cfg, kRef);
    // Odometry drifts 3 m sideways during a 10 s outage.
    for (int i = 1; i <= 10; ++i) {
      s = fuse_step(s, i, std::nullopt, PlanarMotion{0.0, 1.0, 0.3, 1.0}, cfg, kRef);
    }
    CHECK(s.pose.y == doctest::Approx(3.0));
    double prev = 3.0;
    for (int k = 0; k < cfg.reanchor_blend; ++k) {
      const double t = 11.0 + k;
      s = fuse_step(s, t, fix_at(t, 0.0), PlanarMotion{0.0, 1.0, 0.0, 1.0}, cfg, kRef);
      const double err = std::hypot(s.pose.x - t, s.pose.y);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-9);
    CHECK(s.pose.source == PoseSource::kGps);
  }

  SUBCASE("a jump past the gate is ignored") {
    FusedState s;
    s = fuse_step(s, 0.0, fix_at(0, 0), std::nullopt, cfg, kRef);
    s = fuse_step(s, 1.0, fix_at(1, 30), PlanarMotion{0.0, 1.0, 0.0, 1.0}, cfg, kRef);
    CHECK(s.gps_trust == GpsTrust::kSuspect);
    CHECK(s.pose.x == doctest::Approx(1.0));
    CHECK(s.pose.y == doctest::Approx(0.0));
  }

  SUBCASE("argument checks") {
    FusedState s;
    CHECK_THROWS_AS(fuse_step(s, 0.0, std::nullopt, std::nullopt, cfg, kRef), Error);
    s = fuse_step(s, 1.0, fix_at(0, 0), std::nullopt, cfg, kRef);
    CHECK_THROWS_AS(fuse_step(s, 0.5, fix_at(0, 0), std::nullopt, cfg, kRef), Error);
  }

  SUBCASE("pure in its state argument") {
    FusedState s;
    s = fuse_step(s, 0.0, fix_at(0, 0), std::nullopt, cfg, kRef);
    const FusedState a = fuse_step(s, 1.0, fix_at(1, 1), PlanarMotion{0.1, 1.0, 0.0, 1.0}, cfg, kRef);
    const FusedState b = fuse_step(s, 1.0, fix_at(1, 1), PlanarMotion{0.1, 1.0, 0.0, 1.0}, cfg, kRef);
    CHECK(a.pose.x == b.pose.x);
    CHECK(a.pose.yaw == b.pose.yaw);
    CHECK(s.pose.t == 0.0);
  }
}

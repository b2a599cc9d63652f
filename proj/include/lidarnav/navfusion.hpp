// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// GPS / scan-matching switching. GPS positions are trusted while they pass
// both the HDOP threshold and an innovation gate against the odometry
// prediction; otherwise the pose is dead-reckoned from the last trusted fix.
// Returning to GPS blends the accumulated discrepancy out over several fixes
// without ever stepping faster than max_speed.

#ifndef LIDARNAV_NAVFUSION_HPP_
#define LIDARNAV_NAVFUSION_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lidarnav/geometry.hpp"
#include "lidarnav/nmea.hpp"
#include "lidarnav/planar.hpp"

namespace lidarnav {

struct GeoReference {
  double latitude = 0.0;   // deg
  double longitude = 0.0;  // deg
};

/// Local tangent plane (x east, y north) using the WGS-84 meridian and
/// prime-vertical radii at the reference latitude.
Eigen::Vector2d geodetic_to_local(double latitude, double longitude, const GeoReference& ref);
Eigen::Vector2d geodetic_to_local(const GpsFix& fix, const GeoReference& ref);
/// Exact inverse of geodetic_to_local.
GeoReference local_to_geodetic(const Eigen::Vector2d& xy, const GeoReference& ref);

enum class PoseSource { kGps, kLidar, kFused };
std::string_view pose_source_name(PoseSource s);

struct LocalPose {
  double t = 0.0;
  double x = 0.0;  // east, m
  double y = 0.0;  // north, m
  double yaw = 0.0;  // rad, counter-clockwise from east
  PoseSource source = PoseSource::kGps;

  Eigen::Vector2d xy() const { return {x, y}; }
};

/// Advances by a vehicle-frame motion: yaw += rel.yaw, position += R(yaw) *
/// (dx, dy) using the prior yaw. The result is tagged as lidar.
LocalPose integrate_odometry(const LocalPose& pose, const PlanarMotion& rel);

/// Vehicle motion between two captures from a scan-to-scan registration
/// result (target ~= T * source), i.e. the planar part of T^-1.
PlanarMotion vehicle_motion_from_registration(const RigidTransform& scan_transform,
                                              double score = 1.0);

struct FusionConfig {
  double hdop_threshold = 2.0;
  double jump_gate = 5.0;        // m, innovation gate radius
  double gate_growth = 0.05;     // m/s widening since the last trusted fix
  double max_speed = 5.0;        // m/s, output step bound
  int reanchor_blend = 5;        // fixes to blend out a recovery discrepancy
  double gps_timeout = 1.5;      // s without a fix before GPS counts as lost
  double max_dead_reckoning = 60.0;  // s of odometry-only before flagging

  void validate() const;
};

enum class GpsTrust { kTrusted, kSuspect, kLost };
std::string_view gps_trust_name(GpsTrust t);

/// Lost without a fix or with quality 0; suspect when HDOP exceeds the
/// threshold or the fix lies farther than `gate` from `predicted`; trusted
/// otherwise. Without a prediction only HDOP is checked.
GpsTrust gps_validity(const std::optional<GpsFix>& fix,
                      const std::optional<LocalPose>& predicted,
                      const FusionConfig& cfg, const GeoReference& ref,
                      std::optional<double> gate = std::nullopt);

struct FusedState {
  bool initialized = false;
  LocalPose pose;  // last output
  GpsTrust gps_trust = GpsTrust::kLost;
  bool has_anchor = false;
  LocalPose anchor;                          // last trusted GPS pose
  std::vector<PlanarMotion> odometry_since_anchor;
  LocalPose dead_reckoned;                   // anchor advanced by the chain
  bool odometry_available = false;
  double last_gps_time = 0.0;
  bool any_gps = false;
  int blend_remaining = 0;
  Eigen::Vector2d blend_start = Eigen::Vector2d::Zero();
  bool dead_reckoning_only = false;
};

/// One fusion step at time t. At least one of gps/odom must be present and
/// t must not go backwards (kInvalidArgument otherwise).
FusedState fuse_step(const FusedState& state, double t, const std::optional<GpsFix>& gps,
                     const std::optional<PlanarMotion>& odom, const FusionConfig& cfg,
                     const GeoReference& ref);

}  // namespace lidarnav

#endif  // LIDARNAV_NAVFUSION_HPP_

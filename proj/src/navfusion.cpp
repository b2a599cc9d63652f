// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/navfusion.hpp"

#include <cmath>
#include <numbers>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;
constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);

struct Radii {
  double meridian;
  double normal;
};

Radii curvature_radii(double lat_deg) {
  const double s = std::sin(deg2rad(lat_deg));
  const double w = 1.0 - kWgs84E2 * s * s;
  return {kWgs84A * (1.0 - kWgs84E2) / (w * std::sqrt(w)), kWgs84A / std::sqrt(w)};
}

}  // namespace

Eigen::Vector2d geodetic_to_local(double latitude, double longitude, const GeoReference& ref) {
  const Radii r = curvature_radii(ref.latitude);
  const double y = deg2rad(latitude - ref.latitude) * r.meridian;
  const double x = deg2rad(longitude - ref.longitude) * r.normal * std::cos(deg2rad(ref.latitude));
  return {x, y};
}

Eigen::Vector2d geodetic_to_local(const GpsFix& fix, const GeoReference& ref) {
  return geodetic_to_local(fix.latitude, fix.longitude, ref);
}

GeoReference local_to_geodetic(const Eigen::Vector2d& xy, const GeoReference& ref) {
  const Radii r = curvature_radii(ref.latitude);
  return {ref.latitude + rad2deg(xy.y() / r.meridian),
          ref.longitude + rad2deg(xy.x() / (r.normal * std::cos(deg2rad(ref.latitude))))};
}

std::string_view pose_source_name(PoseSource s) {
  switch (s) {
    case PoseSource::kGps: return "gps";
    case PoseSource::kLidar: return "lidar";
    case PoseSource::kFused: return "fused";
  }
  return "?";
}

std::string_view gps_trust_name(GpsTrust t) {
  switch (t) {
    case GpsTrust::kTrusted: return "trusted";
    case GpsTrust::kSuspect: return "suspect";
    case GpsTrust::kLost: return "lost";
  }
  return "?";
}

LocalPose integrate_odometry(const LocalPose& pose, const PlanarMotion& rel) {
  LocalPose out = pose;
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  out.x = pose.x + c * rel.dx - s * rel.dy;
  out.y = pose.y + s * rel.dx + c * rel.dy;
  out.yaw = wrap_angle(pose.yaw + rel.yaw);
  out.source = PoseSource::kLidar;
  return out;
}

PlanarMotion vehicle_motion_from_registration(const RigidTransform& scan_transform,
                                              double score) {
  const RigidTransform motion = scan_transform.inverse();
  PlanarMotion out;
  out.yaw = std::atan2(motion.rotation(1, 0), motion.rotation(0, 0));
  out.dx = motion.translation.x();
  out.dy = motion.translation.y();
  out.score = score;
  return out;
}

void FusionConfig::validate() const {
  if (!(hdop_threshold > 0.0 && jump_gate > 0.0 && max_speed > 0.0 && reanchor_blend > 0 &&
        gps_timeout > 0.0 && max_dead_reckoning > 0.0 && gate_growth >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fusion parameters must be positive");
  }
}

GpsTrust gps_validity(const std::optional<GpsFix>& fix,
                      const std::optional<LocalPose>& predicted,
                      const FusionConfig& cfg, const GeoReference& ref,
                      std::optional<double> gate) {
  if (!fix || fix->fix_quality == 0) return GpsTrust::kLost;
  if (fix->hdop > cfg.hdop_threshold) return GpsTrust::kSuspect;
  if (predicted) {
    const double radius = gate.value_or(cfg.jump_gate);
    if ((geodetic_to_local(*fix, ref) - predicted->xy()).norm() > radius) {
      return GpsTrust::kSuspect;
    }
  }
  return GpsTrust::kTrusted;
}

FusedState fuse_step(const FusedState& state, double t, const std::optional<GpsFix>& gps,
                     const std::optional<PlanarMotion>& odom, const FusionConfig& cfg,
                     const GeoReference& ref) {
  if (!gps && !odom) {
    throw Error(ErrorCode::kInvalidArgument, "fuse_step needs a GPS fix or odometry");
  }
  if (!std::isfinite(t) || (state.initialized && t < state.pose.t)) {
    throw Error(ErrorCode::kInvalidArgument, "fusion timestamps must be non-decreasing");
  }
  FusedState s = state;
  const double dt = state.initialized ? t - state.pose.t : 0.0;

  if (odom) {
    s.dead_reckoned = integrate_odometry(s.dead_reckoned, *odom);
    s.odometry_since_anchor.push_back(*odom);
    s.odometry_available = true;
  }
  s.dead_reckoned.t = t;

  if (gps) {
    const GpsTrust previous = s.gps_trust;
    std::optional<LocalPose> predicted;
    double gate = cfg.jump_gate;
    if (s.has_anchor && !s.odometry_since_anchor.empty()) {
      predicted = s.dead_reckoned;
      gate += cfg.gate_growth * (t - s.anchor.t);
    }
    s.gps_trust = gps_validity(gps, predicted, cfg, ref, gate);
    s.any_gps = true;
    s.last_gps_time = t;
    if (s.gps_trust == GpsTrust::kTrusted) {
      const Eigen::Vector2d fix_xy = geodetic_to_local(*gps, ref);
      if (s.initialized && s.has_anchor && previous != GpsTrust::kTrusted) {
        // Measured against the dead-reckoned pose at this instant; the previous
        // output is one step behind.
        s.blend_start = s.dead_reckoned.xy() - fix_xy;
        s.blend_remaining = cfg.reanchor_blend - 1;
      } else if (s.blend_remaining > 0) {
        --s.blend_remaining;
      }
      s.dead_reckoned.x = fix_xy.x();
      s.dead_reckoned.y = fix_xy.y();
      s.anchor = s.dead_reckoned;
      s.anchor.source = PoseSource::kGps;
      s.has_anchor = true;
      s.odometry_since_anchor.clear();
    }
  } else if (!s.any_gps || t - s.last_gps_time > cfg.gps_timeout) {
    s.gps_trust = GpsTrust::kLost;
  }

  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  if (s.blend_remaining > 0) {
    offset = s.blend_start * (static_cast<double>(s.blend_remaining) / cfg.reanchor_blend);
  }
  const Eigen::Vector2d target = s.dead_reckoned.xy() + offset;
  Eigen::Vector2d out = target;
  bool limited = false;
  // Before the first trusted fix the output has no absolute meaning, so the
  // first anchor is taken directly.
  if (state.initialized && s.odometry_available && state.has_anchor) {
    const Eigen::Vector2d step = target - state.pose.xy();
    const double budget = cfg.max_speed * dt;
    if (step.norm() > budget) {
      out = state.pose.xy() + step * (budget / step.norm());
      limited = true;
    }
  }

  s.pose.t = t;
  s.pose.x = out.x();
  s.pose.y = out.y();
  s.pose.yaw = s.dead_reckoned.yaw;
  if (s.gps_trust != GpsTrust::kTrusted) {
    s.pose.source = PoseSource::kLidar;
  } else if (limited || s.blend_remaining > 0) {
    s.pose.source = PoseSource::kFused;
  } else {
    s.pose.source = PoseSource::kGps;
  }
  s.dead_reckoning_only =
      s.gps_trust != GpsTrust::kTrusted &&
      t - (s.has_anchor ? s.anchor.t : 0.0) > cfg.max_dead_reckoning;
  s.initialized = true;
  return s;
}

}  // namespace lidarnav

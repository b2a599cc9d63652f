// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory error metrics. The estimate is aligned to the truth by its
// first matched pose only, so accumulated drift stays visible.

#ifndef LIDARNAV_METRICS_HPP_
#define LIDARNAV_METRICS_HPP_

#include <span>
#include <vector>

#include "lidarnav/navfusion.hpp"

namespace lidarnav {

struct Metrics {
  double final_yaw_drift = 0.0;  // deg, |yaw error| at the last matched pose
  double travelled_distance_est = 0.0;    // m
  double travelled_distance_truth = 0.0;  // m
  double rpe_translation_rmse = 0.0;  // m per pair
  double rpe_yaw_rmse = 0.0;          // deg per pair
  double ate_rmse = 0.0;              // m
  double match_failure_fraction = 0.0;
  double throughput_hz = 0.0;  // pairs per second of matching
  std::size_t matched_poses = 0;
};

/// Each truth pose is paired with the estimate nearest in time, if that lies
/// within half the median truth period. Throws kNoTemporalOverlap when no
/// pose pairs up. The failure fraction and throughput are left at 0.
Metrics compute_metrics(std::span<const LocalPose> estimated, std::span<const LocalPose> truth);

/// Rigidly moves `estimated` so its pose nearest in time to truth.front()
/// coincides with it.
std::vector<LocalPose> start_align(std::span<const LocalPose> estimated,
                                   std::span<const LocalPose> truth);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant or has fewer than two values.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace lidarnav

#endif  // LIDARNAV_METRICS_HPP_

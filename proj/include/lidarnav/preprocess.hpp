// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scan conditioning: range crop, voxel grid, statistical outlier removal and
// the point-count gate that drops anomalous scans.

#ifndef LIDARNAV_PREPROCESS_HPP_
#define LIDARNAV_PREPROCESS_HPP_

#include <cstddef>

#include "lidarnav/geometry.hpp"

namespace lidarnav {

struct PreprocessConfig {
  double min_range = 1.0;   // m
  double max_range = 80.0;  // m
  double voxel_leaf = 0.3;  // m
  std::size_t sor_k = 16;
  double sor_stddev_mult = 1.5;
  double anomaly_ratio = 0.5;    // in (0, 1]
  std::size_t min_points = 6000;  // below this, matching mostly fails

  /// Throws kInvalidArgument when an invariant is violated.
  void validate() const;
};

/// Keeps points with min_range <= |p| <= max_range, order preserved.
PointCloud crop_range(const PointCloud& cloud, const PreprocessConfig& cfg);

/// One point per occupied voxel (cell index = floor(p / leaf)) at the
/// members' centroid with mean intensity. Output is sorted by cell index.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

struct OutlierStats {
  double mean_distance = 0.0;
  double stddev_distance = 0.0;
  double threshold = 0.0;
  std::size_t removed = 0;
};

/// Removes points whose mean distance to their k nearest neighbors exceeds
/// global_mean + stddev_mult * global_stddev. Throws kTooFewPoints when the
/// cloud has k points or fewer.
PointCloud remove_statistical_outliers(const PointCloud& cloud, std::size_t k,
                                       double stddev_mult,
                                       OutlierStats* stats = nullptr);

enum class GateVerdict { kAccept, kReject };

/// Compares raw point counts of consecutive scans. The first scan
/// (previous_count == 0) is always accepted.
GateVerdict anomaly_gate(std::size_t previous_count, std::size_t current_count,
                         double ratio);

}  // namespace lidarnav

#endif  // LIDARNAV_PREPROCESS_HPP_

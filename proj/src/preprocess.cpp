// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "lidarnav/error.hpp"
#include "lidarnav/neighbor_index.hpp"

namespace lidarnav {

void PreprocessConfig::validate() const {
  if (!(min_range >= 0.0 && min_range < max_range)) {
    throw Error(ErrorCode::kInvalidArgument, "need 0 <= min_range < max_range");
  }
  if (!(voxel_leaf > 0.0)) throw Error(ErrorCode::kInvalidArgument, "voxel_leaf must be > 0");
  if (sor_k < 1) throw Error(ErrorCode::kInvalidArgument, "sor_k must be >= 1");
  if (!(anomaly_ratio > 0.0 && anomaly_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "anomaly_ratio must be in (0, 1]");
  }
}

PointCloud crop_range(const PointCloud& cloud, const PreprocessConfig& cfg) {
  PointCloud out;
  out.stamp = cloud.stamp;
  out.frame_id = cloud.frame_id;
  out.points.reserve(cloud.size());
  const double lo2 = cfg.min_range * cfg.min_range;
  const double hi2 = cfg.max_range * cfg.max_range;
  for (const auto& p : cloud.points) {
    const double r2 = p.x * p.x + p.y * p.y + p.z * p.z;
    if (r2 >= lo2 && r2 <= hi2) out.points.push_back(p);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (!(leaf > 0.0)) throw Error(ErrorCode::kInvalidArgument, "leaf must be > 0");
  using Key = std::array<std::int64_t, 3>;
  const std::size_t n = cloud.size();
  std::vector<Key> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = cloud.points[i];
    keys[i] = {static_cast<std::int64_t>(std::floor(p.x / leaf)),
               static_cast<std::int64_t>(std::floor(p.y / leaf)),
               static_cast<std::int64_t>(std::floor(p.z / leaf))};
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable so members accumulate in input order.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  PointCloud out;
  out.stamp = cloud.stamp;
  out.frame_id = cloud.frame_id;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double sx = 0, sy = 0, sz = 0, si = 0;
    while (j < n && keys[order[j]] == keys[order[i]]) {
      const auto& p = cloud.points[order[j]];
      sx += p.x;
      sy += p.y;
      sz += p.z;
      si += p.intensity;
      ++j;
    }
    const double m = static_cast<double>(j - i);
    out.points.push_back({sx / m, sy / m, sz / m, si / m});
    i = j;
  }
  return out;
}

PointCloud remove_statistical_outliers(const PointCloud& cloud, std::size_t k,
                                       double stddev_mult, OutlierStats* stats) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const std::size_t n = cloud.size();
  if (n <= k) {
    throw Error(ErrorCode::kTooFewPoints, "cloud has " + std::to_string(n) +
                                              " points, need more than k = " +
                                              std::to_string(k));
  }
  const NeighborIndex index(cloud);
  std::vector<double> mean_dist(n);
  std::vector<Neighbor> nn;
  for (std::size_t i = 0; i < n; ++i) {
    // k + 1 because the query point is its own nearest neighbor.
    index.knn(cloud.points[i].position(), k + 1, nn);
    double sum = 0.0;
    std::size_t used = 0;
    bool skipped_self = false;
    for (const auto& nb : nn) {
      if (!skipped_self && nb.index == i) {
        skipped_self = true;
        continue;
      }
      if (used == k) break;
      sum += std::sqrt(nb.sq_distance);
      ++used;
    }
    mean_dist[i] = sum / static_cast<double>(used);
  }

  const double nd = static_cast<double>(n);
  const double mean = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / nd;
  double sq = 0.0;
  for (double d : mean_dist) sq += (d - mean) * (d - mean);
  const double stddev = std::sqrt(sq / (nd - 1.0));
  // The slack keeps numerically equal distances (a regular grid) on the
  // inside of the threshold when the spread is pure rounding noise.
  const double threshold = mean + stddev_mult * stddev + 1e-9 * mean;

  PointCloud out;
  out.stamp = cloud.stamp;
  out.frame_id = cloud.frame_id;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_dist[i] <= threshold) out.points.push_back(cloud.points[i]);
  }
  if (stats) *stats = {mean, stddev, threshold, n - out.size()};
  return out;
}

GateVerdict anomaly_gate(std::size_t previous_count, std::size_t current_count,
                         double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must be in (0, 1]");
  }
  if (previous_count == 0) return GateVerdict::kAccept;
  const double lo = static_cast<double>(std::min(previous_count, current_count));
  const double hi = static_cast<double>(std::max(previous_count, current_count));
  return lo / hi < ratio ? GateVerdict::kReject : GateVerdict::kAccept;
}

}  // namespace lidarnav

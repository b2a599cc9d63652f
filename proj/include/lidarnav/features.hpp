// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Surface normals and Fast Point Feature Histograms (FPFH).

#ifndef LIDARNAV_FEATURES_HPP_
#define LIDARNAV_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lidarnav/geometry.hpp"
#include "lidarnav/neighbor_index.hpp"

namespace lidarnav {

struct NormalCloud {
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> curvature;  // lambda0 / (lambda0 + lambda1 + lambda2)
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return normals.size(); }
  std::size_t valid_count() const;
};

/// Per point: smallest-eigenvalue eigenvector of the k-neighborhood
/// covariance, flipped to face `viewpoint`. Points whose neighborhood has
/// fewer than 3 distinct points, or whose two smallest eigenvalues are both
/// below 1e-12, are marked invalid with a zero normal.
NormalCloud estimate_normals(const PointCloud& cloud, const NeighborIndex& index,
                             std::size_t k, const Eigen::Vector3d& viewpoint);

inline constexpr int kFpfhBinsPerFeature = 11;
inline constexpr int kFpfhSize = 3 * kFpfhBinsPerFeature;

/// Blocks are [alpha | phi | theta], each a percentage histogram summing to
/// 100 for usable descriptors.
struct FpfhDescriptor {
  std::array<double, kFpfhSize> histogram{};
  bool usable = false;
};

struct PairFeatures {
  double alpha = 0.0;  // v . n_t
  double phi = 0.0;    // u . (p_t - p_s) / d
  double theta = 0.0;  // atan2(w . n_t, u . n_t)
};

/// Darboux-frame angular features of an oriented point pair. The source is
/// the endpoint whose normal is closer to the connecting line. Returns false
/// when the frame is undefined (normal parallel to the connecting line or
/// coincident points).
bool compute_pair_features(const Eigen::Vector3d& p1, const Eigen::Vector3d& n1,
                           const Eigen::Vector3d& p2, const Eigen::Vector3d& n2,
                           PairFeatures& out);

/// Bin index for a value in [lo, hi] split into 11 equal bins. Values on an
/// interior edge go to the higher bin; hi itself lands in the last bin.
int fpfh_bin(double value, double lo, double hi);

/// FPFH = SPFH(p) + (1/k) sum_i SPFH(p_i) / d_i over radius neighbors with
/// valid normals, each block renormalized to 100. Points without a valid
/// normal or without any valid-normal neighbor get a zero, unusable
/// descriptor.
std::vector<FpfhDescriptor> compute_fpfh(const PointCloud& cloud,
                                         const NormalCloud& normals,
                                         const NeighborIndex& index, double radius);

std::size_t usable_count(const std::vector<FpfhDescriptor>& descriptors);

}  // namespace lidarnav

#endif  // LIDARNAV_FEATURES_HPP_

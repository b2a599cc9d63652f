// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LIDARNAV_NEIGHBOR_INDEX_HPP_
#define LIDARNAV_NEIGHBOR_INDEX_HPP_

#include <vector>

#include <Eigen/Core>

#include "lidarnav/geometry.hpp"
#include "lidarnav/kdtree.hpp"

namespace lidarnav {

/// Immutable spatial index over a cloud's point positions.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  explicit NeighborIndex(const PointCloud& cloud);

  std::size_t size() const { return tree_.size(); }

  void knn(const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& out) const {
    tree_.knn({q.x(), q.y(), q.z()}, k, out);
  }
  std::vector<Neighbor> knn(const Eigen::Vector3d& q, std::size_t k) const {
    return tree_.knn({q.x(), q.y(), q.z()}, k);
  }
  void radius(const Eigen::Vector3d& q, double r, std::vector<Neighbor>& out) const {
    tree_.radius({q.x(), q.y(), q.z()}, r, out);
  }
  std::vector<Neighbor> radius(const Eigen::Vector3d& q, double r) const {
    return tree_.radius({q.x(), q.y(), q.z()}, r);
  }

 private:
  KdTree<3> tree_;
};

/// Throws kEmptyCloud on an empty cloud.
NeighborIndex build_neighbor_index(const PointCloud& cloud);

}  // namespace lidarnav

#endif  // LIDARNAV_NEIGHBOR_INDEX_HPP_

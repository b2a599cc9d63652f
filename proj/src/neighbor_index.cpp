// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/neighbor_index.hpp"

#include "lidarnav/error.hpp"

namespace lidarnav {

NeighborIndex::NeighborIndex(const PointCloud& cloud) {
  std::vector<KdTree<3>::Point> pts;
  pts.reserve(cloud.size());
  for (const auto& p : cloud.points) pts.push_back({p.x, p.y, p.z});
  tree_ = KdTree<3>(std::move(pts));
}

NeighborIndex build_neighbor_index(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "cannot index an empty cloud");
  return NeighborIndex(cloud);
}

}  // namespace lidarnav

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

constexpr double kMinWeightDistance = 1e-6;

using Histogram = std::array<double, kFpfhSize>;

void add_pair(Histogram& h, const PairFeatures& f, double weight) {
  h[fpfh_bin(f.alpha, -1.0, 1.0)] += weight;
  h[kFpfhBinsPerFeature + fpfh_bin(f.phi, -1.0, 1.0)] += weight;
  h[2 * kFpfhBinsPerFeature + fpfh_bin(f.theta, -std::numbers::pi, std::numbers::pi)] +=
      weight;
}

}  // namespace

std::size_t NormalCloud::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

NormalCloud estimate_normals(const PointCloud& cloud, const NeighborIndex& index,
                             std::size_t k, const Eigen::Vector3d& viewpoint) {
  if (k < 3) throw Error(ErrorCode::kInvalidArgument, "normal estimation needs k >= 3");
  const std::size_t n = cloud.size();
  NormalCloud out;
  out.normals.assign(n, Eigen::Vector3d::Zero());
  out.curvature.assign(n, 0.0);
  out.valid.assign(n, 0);

  std::vector<Neighbor> nn;
  std::vector<Eigen::Vector3d> local;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d p = cloud.points[i].position();
    index.knn(p, k, nn);
    local.clear();
    for (const auto& nb : nn) local.push_back(cloud.points[nb.index].position());

    std::size_t distinct = 0;
    for (std::size_t a = 0; a < local.size() && distinct < 3; ++a) {
      bool seen = false;
      for (std::size_t b = 0; b < a && !seen; ++b) seen = local[a] == local[b];
      if (!seen) ++distinct;
    }
    if (distinct < 3) continue;

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& q : local) mean += q;
    mean /= static_cast<double>(local.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& q : local) cov.noalias() += (q - mean) * (q - mean).transpose();
    cov /= static_cast<double>(local.size());

    solver.compute(cov);
    const Eigen::Vector3d lambda = solver.eigenvalues().cwiseMax(0.0);  // ascending
    if (lambda(0) < 1e-12 && lambda(1) < 1e-12) continue;

    Eigen::Vector3d normal = solver.eigenvectors().col(0).normalized();
    if (normal.dot(viewpoint - p) < 0.0) normal = -normal;
    out.normals[i] = normal;
    out.curvature[i] = lambda(0) / lambda.sum();
    out.valid[i] = 1;
  }
  return out;
}

int fpfh_bin(double value, double lo, double hi) {
  const int bin = static_cast<int>(
      std::floor((value - lo) / (hi - lo) * kFpfhBinsPerFeature));
  return std::clamp(bin, 0, kFpfhBinsPerFeature - 1);
}

bool compute_pair_features(const Eigen::Vector3d& p1, const Eigen::Vector3d& n1,
                           const Eigen::Vector3d& p2, const Eigen::Vector3d& n2,
                           PairFeatures& out) {
  Eigen::Vector3d line = p2 - p1;
  const double dist = line.norm();
  if (dist == 0.0) return false;
  line /= dist;

  const double cos1 = n1.dot(line);
  const double cos2 = n2.dot(line);
  Eigen::Vector3d u = n1;
  Eigen::Vector3d nt = n2;
  double phi = cos1;
  // Near-ties keep the given order; otherwise rounding would pick the
  // source differently for a rotated copy of the same pair.
  if (std::acos(std::clamp(std::abs(cos1), 0.0, 1.0)) >
      std::acos(std::clamp(std::abs(cos2), 0.0, 1.0)) + 1e-9) {
    u = n2;
    nt = n1;
    line = -line;
    phi = -cos2;
  }

  Eigen::Vector3d v = line.cross(u);
  const double v_norm = v.norm();
  if (v_norm == 0.0) return false;
  v /= v_norm;
  const Eigen::Vector3d w = u.cross(v);

  out.alpha = v.dot(nt);
  out.phi = phi;
  out.theta = std::atan2(w.dot(nt), u.dot(nt));
  return true;
}

std::vector<FpfhDescriptor> compute_fpfh(const PointCloud& cloud,
                                         const NormalCloud& normals,
                                         const NeighborIndex& index, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius must be > 0");
  const std::size_t n = cloud.size();
  if (normals.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "normals computed on a different cloud");
  }

  std::vector<Histogram> spfh(n);
  std::vector<std::uint8_t> has_spfh(n, 0);
  // Valid-normal neighbors (excluding self) per point, reused for weighting.
  std::vector<std::vector<Neighbor>> neighborhoods(n);

  std::vector<Neighbor> nn;
  std::vector<PairFeatures> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!normals.valid[i]) continue;
    const Eigen::Vector3d p = cloud.points[i].position();
    index.radius(p, radius, nn);
    auto& hood = neighborhoods[i];
    pairs.clear();
    for (const auto& nb : nn) {
      if (nb.index == i || !normals.valid[nb.index]) continue;
      hood.push_back(nb);
      PairFeatures f;
      if (compute_pair_features(p, normals.normals[i],
                                cloud.points[nb.index].position(),
                                normals.normals[nb.index], f)) {
        pairs.push_back(f);
      }
    }
    if (pairs.empty()) continue;
    const double step = 100.0 / static_cast<double>(pairs.size());
    spfh[i].fill(0.0);
    for (const auto& f : pairs) add_pair(spfh[i], f, step);
    has_spfh[i] = 1;
  }

  std::vector<FpfhDescriptor> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_spfh[i]) continue;
    Histogram h{};
    std::size_t k = 0;
    for (const auto& nb : neighborhoods[i]) {
      if (has_spfh[nb.index]) ++k;
    }
    if (k > 0) {
      const double scale = 1.0 / static_cast<double>(k);
      for (const auto& nb : neighborhoods[i]) {
        if (!has_spfh[nb.index]) continue;
        const double d = std::max(std::sqrt(nb.sq_distance), kMinWeightDistance);
        const double wgt = scale / d;
        const auto& s = spfh[nb.index];
        for (int b = 0; b < kFpfhSize; ++b) h[b] += wgt * s[b];
      }
    }
    for (int b = 0; b < kFpfhSize; ++b) h[b] += spfh[i][b];

    for (int block = 0; block < 3; ++block) {
      double sum = 0.0;
      for (int b = 0; b < kFpfhBinsPerFeature; ++b) sum += h[block * kFpfhBinsPerFeature + b];
      if (sum > 0.0) {
        const double norm = 100.0 / sum;
        for (int b = 0; b < kFpfhBinsPerFeature; ++b) h[block * kFpfhBinsPerFeature + b] *= norm;
      }
    }
    out[i].histogram = h;
    out[i].usable = true;
  }
  return out;
}

std::size_t usable_count(const std::vector<FpfhDescriptor>& descriptors) {
  return static_cast<std::size_t>(std::count_if(
      descriptors.begin(), descriptors.end(), [](const auto& d) { return d.usable; }));
}

}  // namespace lidarnav

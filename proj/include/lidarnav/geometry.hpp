// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Points, clouds and rigid transforms, plus the closed-form least-squares
// rigid transform estimator used by every registration stage.

#ifndef LIDARNAV_GEOMETRY_HPP_
#define LIDARNAV_GEOMETRY_HPP_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace lidarnav {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  // reflectance in [0, 1]

  Eigen::Vector3d position() const { return {x, y, z}; }
  bool is_valid() const;
};

Point3 make_point(const Eigen::Vector3d& p, double intensity = 0.0);

struct PointCloud {
  std::vector<Point3> points;
  double stamp = 0.0;  // seconds, monotonic capture time
  std::string frame_id = "lidar";

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Proper rigid motion p -> rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  RigidTransform inverse() const;
  Eigen::Matrix4d matrix() const;

  /// Largest deviation of R^T R from identity and of det(R) from one.
  double orthonormality_error() const;
};

/// Z-Y-X Euler decomposition of a transform with registration diagnostics.
struct PosedTransform {
  RigidTransform transform;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  double fitness = 0.0;  // mean squared residual, m^2
  std::size_t inlier_count = 0;
};

/// Applies b first, then a (the matrix product a * b).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud);

/// rotation = Rz(yaw) * Ry(pitch) * Rx(roll).
RigidTransform transform_from_components(double yaw, double pitch, double roll,
                                         const Eigen::Vector3d& translation);

/// Inverse of transform_from_components. At pitch = +-pi/2 roll is pinned to 0.
PosedTransform decompose(const RigidTransform& t);

/// Keeps only yaw and the x-y translation.
RigidTransform project_planar(const RigidTransform& t);

/// Closest rotation matrix in the Frobenius sense.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

using PointPair = std::pair<Eigen::Vector3d, Eigen::Vector3d>;

/// Least-squares rigid transform mapping pair.first onto pair.second
/// (cross-covariance SVD with reflection correction). Throws
/// kDegenerateGeometry for fewer than 3 pairs or collinear/coincident sources.
RigidTransform estimate_rigid_transform(std::span<const PointPair> pairs);

/// Same estimator over index-aligned source/target position lists.
RigidTransform estimate_rigid_transform(std::span<const Eigen::Vector3d> source,
                                        std::span<const Eigen::Vector3d> target);

/// Sum of squared residuals ||R a + t - b||^2.
double sum_squared_residual(const RigidTransform& t,
                            std::span<const PointPair> pairs);

double wrap_angle(double angle);  // to (-pi, pi]

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace lidarnav

#endif  // LIDARNAV_GEOMETRY_HPP_

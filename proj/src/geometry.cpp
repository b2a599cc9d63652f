// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

constexpr double kReorthoThreshold = 1e-12;

}  // namespace

bool Point3::is_valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
         intensity >= 0.0 && intensity <= 1.0;
}

Point3 make_point(const Eigen::Vector3d& p, double intensity) {
  return {p.x(), p.y(), p.z(), intensity};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double RigidTransform::orthonormality_error() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  return std::max(ortho, std::abs(rotation.determinant() - 1.0));
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (out.orthonormality_error() > kReorthoThreshold) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.stamp = cloud.stamp;
  out.frame_id = cloud.frame_id;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    out.points.push_back(make_point(t.apply(p.position()), p.intensity));
  }
  return out;
}

RigidTransform transform_from_components(double yaw, double pitch, double roll,
                                         const Eigen::Vector3d& translation) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  RigidTransform t;
  // Rz(yaw) * Ry(pitch) * Rx(roll), expanded.
  t.rotation << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
      sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
      -sp, cp * sr, cp * cr;
  t.translation = translation;
  return t;
}

PosedTransform decompose(const RigidTransform& t) {
  const Eigen::Matrix3d& r = t.rotation;
  PosedTransform out;
  out.transform = t;
  const double s = std::clamp(-r(2, 0), -1.0, 1.0);
  out.pitch = std::asin(s);
  if (std::abs(s) > 1.0 - 1e-12) {
    // Gimbal lock: yaw and roll share one axis; pin roll.
    out.roll = 0.0;
    out.yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    out.yaw = std::atan2(r(1, 0), r(0, 0));
    out.roll = std::atan2(r(2, 1), r(2, 2));
  }
  return out;
}

RigidTransform project_planar(const RigidTransform& t) {
  const double yaw = std::atan2(t.rotation(1, 0), t.rotation(0, 0));
  return transform_from_components(yaw, 0.0, 0.0,
                                   {t.translation.x(), t.translation.y(), 0.0});
}

RigidTransform estimate_rigid_transform(std::span<const Eigen::Vector3d> source,
                                        std::span<const Eigen::Vector3d> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::kInvalidArgument, "source/target size mismatch");
  }
  const std::size_t n = source.size();
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "need at least 3 correspondences, got " + std::to_string(n));
  }

  Eigen::Vector3d mean_s = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_t = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_s += source[i];
    mean_t += target[i];
  }
  mean_s /= static_cast<double>(n);
  mean_t /= static_cast<double>(n);

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d ds = source[i] - mean_s;
    cross.noalias() += ds * (target[i] - mean_t).transpose();
    spread.noalias() += ds * ds.transpose();
  }

  // Eigenvalues ascending: collinear sources leave two of them at zero.
  const Eigen::Vector3d lambda =
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(spread, Eigen::EigenvaluesOnly)
          .eigenvalues();
  if (lambda(2) <= 1e-20 || lambda(1) <= 1e-12 * lambda(2)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "source points are coincident or collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform t;
  t.rotation = v * d * u.transpose();
  t.translation = mean_t - t.rotation * mean_s;
  return t;
}

RigidTransform estimate_rigid_transform(std::span<const PointPair> pairs) {
  std::vector<Eigen::Vector3d> source;
  std::vector<Eigen::Vector3d> target;
  source.reserve(pairs.size());
  target.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    source.push_back(a);
    target.push_back(b);
  }
  return estimate_rigid_transform(source, target);
}

double sum_squared_residual(const RigidTransform& t,
                            std::span<const PointPair> pairs) {
  double sum = 0.0;
  for (const auto& [a, b] : pairs) sum += (t.apply(a) - b).squaredNorm();
  return sum;
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace lidarnav

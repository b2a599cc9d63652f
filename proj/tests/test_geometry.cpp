// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lidarnav/error.hpp"
#include "lidarnav/geometry.hpp"
#include "test_util.hpp"

using namespace lidarnav;
using lidarnav::test::random_cloud;
using lidarnav::test::random_transform;

namespace {

constexpr double kPi = std::numbers::pi;

// Horn's closed-form quaternion solution, used as an oracle independent of
// the SVD path under test.
RigidTransform horn_quaternion(const std::vector<PointPair>& pairs) {
  Eigen::Vector3d ms = Eigen::Vector3d::Zero(), mt = Eigen::Vector3d::Zero();
  for (const auto& [s, t] : pairs) {
    ms += s;
    mt += t;
  }
  ms /= static_cast<double>(pairs.size());
  mt /= static_cast<double>(pairs.size());
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& [s, t] : pairs) m += (s - ms) * (t - mt).transpose();
  const double sxx = m(0, 0), sxy = m(0, 1), sxz = m(0, 2);
  const double syx = m(1, 0), syy = m(1, 1), syz = m(1, 2);
  const double szx = m(2, 0), szy = m(2, 1), szz = m(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(n);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  RigidTransform out;
  out.rotation = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized().toRotationMatrix();
  out.translation = mt - out.rotation * ms;
  return out;
}

std::vector<PointPair> make_pairs(const PointCloud& c, const RigidTransform& t) {
  std::vector<PointPair> pairs;
  for (const auto& p : c.points) pairs.emplace_back(p.position(), t.apply(p.position()));
  return pairs;
}

}  // namespace

TEST_CASE("compose with identity and inverse") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform t = random_transform(rng, kPi, 10.0);
    const RigidTransform a = compose(RigidTransform::identity(), t);
    CHECK(test::rotation_error(a, t) < 1e-12);
    CHECK(test::translation_error(a, t) < 1e-12);
    const RigidTransform e = compose(t, t.inverse());
    CHECK(test::rotation_error(e, RigidTransform::identity()) < 1e-9);
    CHECK(e.translation.norm() < 1e-9);
  }
}

TEST_CASE("yaw 30 composed with yaw 60 is yaw 90") {
  const RigidTransform a = transform_from_components(deg2rad(30), 0, 0, Eigen::Vector3d::Zero());
  const RigidTransform b = transform_from_components(deg2rad(60), 0, 0, Eigen::Vector3d::Zero());
  const Eigen::Matrix3d expected =
      Eigen::AngleAxisd(kPi / 6, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
      Eigen::AngleAxisd(kPi / 3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const RigidTransform c = compose(a, b);
  CHECK((c.rotation - expected).norm() < 1e-12);
  CHECK(decompose(c).yaw == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("compose is associative") {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_transform(rng, kPi, 5), b = random_transform(rng, kPi, 5),
               c = random_transform(rng, kPi, 5);
    const auto l = compose(compose(a, b), c), r = compose(a, compose(b, c));
    CHECK(test::rotation_error(l, r) < 1e-9);
    CHECK(test::translation_error(l, r) < 1e-9);
  }
}

TEST_CASE("apply_transform") {
  PointCloud one;
  one.points.push_back({0, 0, 0, 0.5});
  RigidTransform shift;
  shift.translation = {1, 0, 0};
  const PointCloud moved = apply_transform(shift, one);
  CHECK(moved.points[0].x == 1.0);
  CHECK(moved.points[0].intensity == 0.5);

  Rng rng(3);
  const PointCloud c = random_cloud(rng, 100, 20.0);
  const PointCloud same = apply_transform(RigidTransform::identity(), c);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(same.points[i].position() == c.points[i].position());

  const RigidTransform t = random_transform(rng, kPi, 50.0);
  const PointCloud d = apply_transform(t, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double before = (c.points[i].position() - c.points[j].position()).norm();
      const double after = (d.points[i].position() - d.points[j].position()).norm();
      worst = std::max(worst, std::fabs(before - after));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("transform_from_components") {
  const RigidTransform id = transform_from_components(0, 0, 0, Eigen::Vector3d::Zero());
  CHECK(test::rotation_error(id, RigidTransform::identity()) == 0.0);
  const RigidTransform q = transform_from_components(kPi / 2, 0, 0, Eigen::Vector3d::Zero());
  CHECK((q.apply({1, 0, 0}) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double yaw = uniform(rng, -3.1, 3.1), pitch = uniform(rng, -1.4, 1.4),
                 roll = uniform(rng, -3.1, 3.1);
    const Eigen::Vector3d tr(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5));
    const PosedTransform p = decompose(transform_from_components(yaw, pitch, roll, tr));
    CHECK(p.yaw == doctest::Approx(yaw).epsilon(1e-9));
    CHECK(p.pitch == doctest::Approx(pitch).epsilon(1e-9));
    CHECK(p.roll == doctest::Approx(roll).epsilon(1e-9));
    CHECK((p.transform.translation - tr).norm() < 1e-12);
  }
}

TEST_CASE("estimate_rigid_transform hand cases") {
  std::vector<PointPair> shift = {{{0, 0, 0}, {1, 0, 0}}, {{1, 0, 0}, {2, 0, 0}}, {{0, 1, 0}, {1, 1, 0}}};
  const RigidTransform t = estimate_rigid_transform(shift);
  CHECK(test::rotation_error(t, RigidTransform::identity()) < 1e-12);
  CHECK((t.translation - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);

  std::vector<PointPair> square = {{{1, 1, 0}, {-1, 1, 0}},
                                   {{-1, 1, 0}, {-1, -1, 0}},
                                   {{-1, -1, 0}, {1, -1, 0}},
                                   {{1, -1, 0}, {1, 1, 0}}};
  const PosedTransform r = decompose(estimate_rigid_transform(square));
  CHECK(r.yaw == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(r.transform.translation.norm() < 1e-9);
}

TEST_CASE("estimate_rigid_transform rejects degenerate input") {
  std::vector<PointPair> two = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}};
  CHECK_THROWS_AS(estimate_rigid_transform(two), Error);
  std::vector<PointPair> line = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{2, 0, 0}, {2, 0, 0}}};
  CHECK_THROWS_AS(estimate_rigid_transform(line), Error);
}

TEST_CASE("estimate_rigid_transform matches the quaternion oracle") {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const PointCloud c = random_cloud(rng, 10 + uniform_index(rng, 40), 10.0);
    const RigidTransform truth = random_transform(rng, kPi, 20.0);
    auto pairs = make_pairs(c, truth);
    const RigidTransform est = estimate_rigid_transform(pairs);
    CHECK(test::rotation_error(est, truth) < 1e-9);
    CHECK(test::translation_error(est, truth) < 1e-9);
    CHECK(est.orthonormality_error() < 1e-12);
    CHECK(est.rotation.determinant() == doctest::Approx(1.0));

    // With noise both solvers minimize the same objective.
    for (auto& p : pairs) p.second += Eigen::Vector3d(gaussian(rng), gaussian(rng), gaussian(rng)) * 0.05;
    const RigidTransform a = estimate_rigid_transform(pairs), b = horn_quaternion(pairs);
    CHECK(test::rotation_error(a, b) < 1e-8);
    CHECK(test::translation_error(a, b) < 1e-8);
  }
}

TEST_CASE("optimum residual is not beaten by perturbations") {
  Rng rng(6);
  for (int inst = 0; inst < 5; ++inst) {
    const PointCloud c = random_cloud(rng, 3 + uniform_index(rng, 8), 5.0);
    auto pairs = make_pairs(c, random_transform(rng, kPi, 5));
    for (auto& p : pairs) p.second += Eigen::Vector3d(gaussian(rng), gaussian(rng), gaussian(rng)) * 0.2;
    const RigidTransform best = estimate_rigid_transform(pairs);
    const double optimum = sum_squared_residual(best, pairs);
    for (int k = 0; k < 1000; ++k) {
      const RigidTransform d = compose(random_transform(rng, 0.05, 0.05), best);
      CHECK(sum_squared_residual(d, pairs) >= optimum - 1e-12);
    }
  }
}

TEST_CASE("wrap_angle range") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

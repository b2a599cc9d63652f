// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lidarnav/error.hpp"
#include "lidarnav/metrics.hpp"
#include "lidarnav/navfusion.hpp"
#include "lidarnav/random.hpp"

using namespace lidarnav;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<LocalPose> curvy_truth(std::size_t n) {
  std::vector<LocalPose> out;
  LocalPose p;
  for (std::size_t i = 0; i < n; ++i) {
    p.t = 0.1 * static_cast<double>(i);
    out.push_back(p);
    p = integrate_odometry(p, {0.01 * std::sin(0.05 * i), 0.2, 0.0, 1.0});
  }
  return out;
}

}  // namespace

TEST_CASE("identical trajectories give zero error") {
  const auto truth = curvy_truth(120);
  const Metrics m = compute_metrics(truth, truth);
  CHECK(m.final_yaw_drift == 0.0);
  CHECK(m.ate_rmse == 0.0);
  CHECK(m.rpe_translation_rmse == 0.0);
  CHECK(m.rpe_yaw_rmse == 0.0);
  CHECK(m.matched_poses == truth.size());
  CHECK(m.travelled_distance_est == doctest::Approx(0.2 * 119).epsilon(1e-9));
  CHECK(m.travelled_distance_truth == m.travelled_distance_est);
  CHECK(m.match_failure_fraction == 0.0);
}

TEST_CASE("constant yaw rate error accumulates to the final drift") {
  // 200 pairs, each estimated 0.1 deg too far to the left.
  std::vector<LocalPose> truth, est;
  LocalPose t, e;
  for (int i = 0; i <= 200; ++i) {
    t.t = e.t = i;
    truth.push_back(t);
    est.push_back(e);
    t = integrate_odometry(t, {0.0, 1.0, 0.0, 1.0});
    e = integrate_odometry(e, {0.1 * kDeg, 1.0, 0.0, 1.0});
  }
  const Metrics m = compute_metrics(est, truth);
  CHECK(std::fabs(m.final_yaw_drift - 20.0) < 1e-6);
  CHECK(m.rpe_yaw_rmse == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(m.ate_rmse > 0.0);
}

TEST_CASE("start alignment removes an initial offset only") {
  const auto truth = curvy_truth(80);
  auto shifted = truth;
  for (auto& p : shifted) {
    p.x += 1.0;
    p.y -= 0.5;
  }
  CHECK(compute_metrics(shifted, truth).ate_rmse < 1e-9);

  const auto aligned = start_align(shifted, truth);
  CHECK(aligned.front().x == doctest::Approx(truth.front().x));
  CHECK(aligned.back().y == doctest::Approx(truth.back().y));

  // A later offset is not aligned away.
  auto late = truth;
  for (std::size_t i = 40; i < late.size(); ++i) late[i].x += 1.0;
  CHECK(compute_metrics(late, truth).ate_rmse == doctest::Approx(std::sqrt(40.0 / 80.0)));
}

TEST_CASE("temporal matching") {
  const auto truth = curvy_truth(20);
  std::vector<LocalPose> far = truth;
  for (auto& p : far) p.t += 100.0;
  CHECK_THROWS_AS(compute_metrics(far, truth), Error);
  try {
    compute_metrics(far, truth);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoTemporalOverlap);
  }
  // Estimate sampled at half the rate still pairs every other truth pose.
  std::vector<LocalPose> sparse;
  for (std::size_t i = 0; i < truth.size(); i += 2) sparse.push_back(truth[i]);
  CHECK(compute_metrics(sparse, truth).matched_poses == 10);
}

TEST_CASE("spearman") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 8, 16, 32};
  const std::vector<double> down{5, 4, 3, 2, 1};
  CHECK(spearman(a, up) == doctest::Approx(1.0));
  CHECK(spearman(a, down) == doctest::Approx(-1.0));
  const std::vector<double> flat{3, 3, 3, 3, 3};
  CHECK(spearman(a, flat) == 0.0);

  // Ties get average ranks: compare with Pearson on hand-ranked values.
  const std::vector<double> x{10, 20, 20, 30};
  const std::vector<double> y{1, 3, 2, 4};
  const double rx[] = {1, 2.5, 2.5, 4}, ry[] = {1, 3, 2, 4};
  double mx = 2.5, my = 2.5, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  CHECK(spearman(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
}

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

double median_period(std::span<const LocalPose> poses) {
  std::vector<double> dt;
  for (std::size_t i = 1; i < poses.size(); ++i) dt.push_back(poses[i].t - poses[i - 1].t);
  if (dt.empty()) return 0.0;
  std::nth_element(dt.begin(), dt.begin() + dt.size() / 2, dt.end());
  return dt[dt.size() / 2];
}

// Index into `poses` (sorted by t) nearest to t; ties go to the earlier one.
std::size_t nearest(std::span<const LocalPose> poses, double t) {
  const auto it = std::lower_bound(poses.begin(), poses.end(), t,
                                   [](const LocalPose& p, double v) { return p.t < v; });
  if (it == poses.begin()) return 0;
  if (it == poses.end()) return poses.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - poses.begin());
  return (t - poses[hi - 1].t <= poses[hi].t - t) ? hi - 1 : hi;
}

struct Se2 {
  double x, y, yaw;
};

Se2 relative(const LocalPose& a, const LocalPose& b) {
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  const double dx = b.x - a.x, dy = b.y - a.y;
  return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(b.yaw - a.yaw)};
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::vector<LocalPose> start_align(std::span<const LocalPose> estimated,
                                   std::span<const LocalPose> truth) {
  std::vector<LocalPose> out(estimated.begin(), estimated.end());
  if (estimated.empty() || truth.empty()) return out;
  const LocalPose& e0 = estimated[nearest(estimated, truth.front().t)];
  const LocalPose& t0 = truth.front();
  const double dyaw = wrap_angle(t0.yaw - e0.yaw);
  const double c = std::cos(dyaw), s = std::sin(dyaw);
  for (LocalPose& p : out) {
    const double dx = p.x - e0.x, dy = p.y - e0.y;
    p.x = t0.x + c * dx - s * dy;
    p.y = t0.y + s * dx + c * dy;
    p.yaw = wrap_angle(p.yaw + dyaw);
  }
  return out;
}

Metrics compute_metrics(std::span<const LocalPose> estimated, std::span<const LocalPose> truth) {
  if (estimated.empty() || truth.empty()) {
    throw Error(ErrorCode::kNoTemporalOverlap, "empty trajectory");
  }
  const double period = median_period(truth);
  const double tolerance = period > 0.0 ? 0.5 * period : 1e-9;

  // Pairs (truth index, estimate index) that align in time.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t j = nearest(estimated, truth[i].t);
    if (std::abs(estimated[j].t - truth[i].t) <= tolerance + 1e-9) pairs.emplace_back(i, j);
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kNoTemporalOverlap, "no estimated pose within half a period of truth");
  }

  std::vector<LocalPose> est;
  std::vector<LocalPose> tru;
  for (auto [i, j] : pairs) {
    tru.push_back(truth[i]);
    est.push_back(estimated[j]);
  }
  est = start_align(est, std::span<const LocalPose>(tru).first(1));

  Metrics m;
  m.matched_poses = pairs.size();
  double ate = 0.0, rpe_t = 0.0, rpe_y = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    ate += (est[k].xy() - tru[k].xy()).squaredNorm();
    if (k == 0) continue;
    m.travelled_distance_est += (est[k].xy() - est[k - 1].xy()).norm();
    m.travelled_distance_truth += (tru[k].xy() - tru[k - 1].xy()).norm();
    const Se2 re = relative(est[k - 1], est[k]);
    const Se2 rt = relative(tru[k - 1], tru[k]);
    rpe_t += (re.x - rt.x) * (re.x - rt.x) + (re.y - rt.y) * (re.y - rt.y);
    const double dy = wrap_angle(re.yaw - rt.yaw);
    rpe_y += dy * dy;
  }
  const double n = static_cast<double>(est.size());
  m.ate_rmse = std::sqrt(ate / n);
  if (est.size() > 1) {
    m.rpe_translation_rmse = std::sqrt(rpe_t / (n - 1.0));
    m.rpe_yaw_rmse = rad2deg(std::sqrt(rpe_y / (n - 1.0)));
  }
  m.final_yaw_drift = std::abs(rad2deg(wrap_angle(est.back().yaw - tru.back().yaw)));
  return m;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "spearman sizes differ");
  if (a.size() < 2) return 0.0;
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace lidarnav

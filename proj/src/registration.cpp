// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/registration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "lidarnav/error.hpp"
#include "lidarnav/kdtree.hpp"
#include "lidarnav/random.hpp"

namespace lidarnav {

namespace {

using DescriptorTree = KdTree<kFpfhSize>;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct UsableSet {
  std::vector<std::size_t> indices;  // positions in the descriptor list
  DescriptorTree tree;
};

UsableSet index_usable(const std::vector<FpfhDescriptor>& desc) {
  UsableSet set;
  std::vector<DescriptorTree::Point> pts;
  for (std::size_t i = 0; i < desc.size(); ++i) {
    if (!desc[i].usable) continue;
    set.indices.push_back(i);
    pts.push_back(desc[i].histogram);
  }
  set.tree = DescriptorTree(std::move(pts));
  return set;
}

double rotation_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

struct Pairing {
  std::vector<Eigen::Vector3d> source;  // already transformed
  std::vector<Eigen::Vector3d> target;
  double truncated_mse = 0.0;
  double inlier_mse = 0.0;
};

Pairing pair_points(const PointCloud& source, const PointCloud& target,
                    const NeighborIndex& target_index, const RigidTransform& t,
                    double max_dist) {
  Pairing out;
  const double max2 = max_dist * max_dist;
  std::vector<Neighbor> nn;
  double truncated = 0.0;
  double inlier = 0.0;
  for (const auto& p : source.points) {
    const Eigen::Vector3d q = t.apply(p.position());
    target_index.knn(q, 1, nn);
    const double d2 = nn.empty() ? max2 : nn.front().sq_distance;
    if (!nn.empty() && d2 <= max2) {
      out.source.push_back(q);
      out.target.push_back(target.points[nn.front().index].position());
      inlier += d2;
      truncated += d2;
    } else {
      truncated += max2;
    }
  }
  out.truncated_mse = truncated / static_cast<double>(source.size());
  out.inlier_mse = out.source.empty() ? 0.0 : inlier / static_cast<double>(out.source.size());
  return out;
}

}  // namespace

void RegistrationConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be > 0");
  };
  if (icp_max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "icp_max_iterations must be >= 1");
  positive(icp_translation_eps, "icp_translation_eps");
  positive(icp_rotation_eps, "icp_rotation_eps");
  positive(icp_max_corr_distance, "icp_max_corr_distance");
  if (ransac_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "ransac_iterations must be >= 1");
  positive(ransac_inlier_threshold, "ransac_inlier_threshold");
  if (normal_k < 3) throw Error(ErrorCode::kInvalidArgument, "normal_k must be >= 3");
  positive(fpfh_radius, "fpfh_radius");
  if (sac_candidates < 1) throw Error(ErrorCode::kInvalidArgument, "sac_candidates must be >= 1");
  positive(sac_truncation, "sac_truncation");
  if (!(sac_edge_similarity >= 0.0 && sac_edge_similarity < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sac_edge_similarity must be in [0, 1)");
  }
  if (sac_score_points < 1) throw Error(ErrorCode::kInvalidArgument, "sac_score_points must be >= 1");
}

std::vector<Correspondence> match_features(const std::vector<FpfhDescriptor>& source,
                                           const std::vector<FpfhDescriptor>& target,
                                           bool mutual) {
  const UsableSet tgt = index_usable(target);
  if (tgt.indices.empty() || usable_count(source) == 0) {
    throw Error(ErrorCode::kNoUsableDescriptors, "no usable descriptors to match");
  }
  std::optional<UsableSet> src;
  if (mutual) src = index_usable(source);

  std::vector<Correspondence> out;
  std::vector<Neighbor> nn;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (!source[i].usable) continue;
    tgt.tree.knn(source[i].histogram, 1, nn);
    const std::size_t j = tgt.indices[nn.front().index];
    if (mutual) {
      std::vector<Neighbor> back;
      src->tree.knn(target[j].histogram, 1, back);
      if (src->indices[back.front().index] != i) continue;
    }
    out.push_back({i, j, std::sqrt(nn.front().sq_distance)});
  }
  return out;
}

std::vector<Correspondence> reject_correspondences_ransac(
    const std::vector<Correspondence>& correspondences, const PointCloud& source,
    const PointCloud& target, const RegistrationConfig& cfg) {
  const std::size_t n = correspondences.size();
  if (n < 3) {
    throw Error(ErrorCode::kTooFewCorrespondences,
                "RANSAC needs 3 correspondences, got " + std::to_string(n));
  }
  std::vector<Eigen::Vector3d> src(n), tgt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = correspondences[i];
    if (c.source_index >= source.size() || c.target_index >= target.size()) {
      throw Error(ErrorCode::kInvalidArgument, "correspondence index out of range");
    }
    src[i] = source.points[c.source_index].position();
    tgt[i] = target.points[c.target_index].position();
  }

  const double thr2 = cfg.ransac_inlier_threshold * cfg.ransac_inlier_threshold;
  const auto inliers_of = [&](const RigidTransform& t) {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < n; ++i) {
      if ((t.apply(src[i]) - tgt[i]).squaredNorm() <= thr2) in.push_back(i);
    }
    return in;
  };

  Rng rng(cfg.seed);
  std::vector<std::size_t> best;
  std::array<Eigen::Vector3d, 3> sample_src, sample_tgt;
  for (std::size_t it = 0; it < cfg.ransac_iterations; ++it) {
    const std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= a) ++b;
    std::size_t c = uniform_index(rng, n - 2);
    if (c >= std::min(a, b)) ++c;
    if (c >= std::max(a, b)) ++c;
    const std::size_t idx[3] = {a, b, c};
    for (int k = 0; k < 3; ++k) {
      sample_src[k] = src[idx[k]];
      sample_tgt[k] = tgt[idx[k]];
    }
    RigidTransform t;
    try {
      t = estimate_rigid_transform(sample_src, sample_tgt);
    } catch (const Error&) {
      continue;
    }
    auto in = inliers_of(t);
    if (in.size() > best.size()) best = std::move(in);
    if (best.size() == n) break;
  }
  if (best.size() < 3) {
    throw Error(ErrorCode::kNoConsensus,
                "best consensus set has " + std::to_string(best.size()) + " members");
  }

  // One least-squares refit over the consensus set.
  {
    std::vector<Eigen::Vector3d> bs, bt;
    for (std::size_t i : best) {
      bs.push_back(src[i]);
      bt.push_back(tgt[i]);
    }
    try {
      auto refit = inliers_of(estimate_rigid_transform(bs, bt));
      if (refit.size() > best.size()) best = std::move(refit);
    } catch (const Error&) {
    }
  }

  std::vector<Correspondence> out;
  out.reserve(best.size());
  for (std::size_t i : best) out.push_back(correspondences[i]);
  return out;
}

RigidTransform initial_align(const PointCloud& source, const PointCloud& target,
                             const std::vector<FpfhDescriptor>& source_desc,
                             const std::vector<FpfhDescriptor>& target_desc,
                             const RegistrationConfig& cfg,
                             const std::vector<RigidTransform>& extra_hypotheses) {
  if (source_desc.size() != source.size() || target_desc.size() != target.size()) {
    throw Error(ErrorCode::kInvalidArgument, "descriptor/cloud size mismatch");
  }
  std::vector<std::size_t> usable_src;
  for (std::size_t i = 0; i < source_desc.size(); ++i) {
    if (source_desc[i].usable) usable_src.push_back(i);
  }
  const UsableSet tgt = index_usable(target_desc);
  if (usable_src.empty() || tgt.indices.empty()) {
    throw Error(ErrorCode::kNoUsableDescriptors, "no usable descriptors for alignment");
  }

  const NeighborIndex target_index(target);
  std::vector<Eigen::Vector3d> score_points;
  {
    const std::size_t stride =
        std::max<std::size_t>(1, source.size() / cfg.sac_score_points);
    for (std::size_t i = 0; i < source.size(); i += stride) {
      score_points.push_back(source.points[i].position());
    }
  }
  const double trunc2 = cfg.sac_truncation * cfg.sac_truncation;
  std::vector<Neighbor> nn;
  // Mean truncated squared residual; stops early once `bound` is exceeded.
  const auto score = [&](const RigidTransform& t, double bound) {
    const double limit = bound * static_cast<double>(score_points.size());
    double sum = 0.0;
    for (const auto& p : score_points) {
      target_index.knn(t.apply(p), 1, nn);
      sum += std::min(nn.front().sq_distance, trunc2);
      if (sum > limit) return std::numeric_limits<double>::infinity();
    }
    return sum / static_cast<double>(score_points.size());
  };
  const auto shape = [&](const RigidTransform& t) {
    return cfg.constrain_planar_guess ? project_planar(t) : t;
  };

  RigidTransform best = RigidTransform::identity();
  double best_score = score(best, std::numeric_limits<double>::infinity());
  for (const auto& h : extra_hypotheses) {
    const RigidTransform t = shape(h);
    const double s = score(t, best_score);
    if (s < best_score) {
      best_score = s;
      best = t;
    }
  }

  // Candidate lists are filled lazily: only sampled points need them.
  std::vector<std::vector<std::size_t>> candidates(source.size());
  const auto candidates_of = [&](std::size_t i) -> const std::vector<std::size_t>& {
    auto& c = candidates[i];
    if (c.empty()) {
      for (const auto& nb : tgt.tree.knn(source_desc[i].histogram, cfg.sac_candidates)) {
        c.push_back(tgt.indices[nb.index]);
      }
    }
    return c;
  };

  Rng rng(derive_seed(cfg.seed, 1));
  const double min_d2 = cfg.sac_min_sample_distance * cfg.sac_min_sample_distance;
  std::array<Eigen::Vector3d, 3> s_pts, t_pts;
  for (std::size_t it = 0; it < cfg.ransac_iterations; ++it) {
    std::size_t chosen[3];
    int found = 0;
    for (int attempt = 0; attempt < 100 && found < 3; ++attempt) {
      const std::size_t cand = usable_src[uniform_index(rng, usable_src.size())];
      const Eigen::Vector3d p = source.points[cand].position();
      bool ok = true;
      for (int k = 0; k < found && ok; ++k) {
        ok = (source.points[chosen[k]].position() - p).squaredNorm() >= min_d2;
      }
      if (ok) chosen[found++] = cand;
    }
    if (found < 3) continue;

    for (int k = 0; k < 3; ++k) {
      const auto& c = candidates_of(chosen[k]);
      s_pts[k] = source.points[chosen[k]].position();
      t_pts[k] = target.points[c[uniform_index(rng, c.size())]].position();
    }
    // Rigid motions preserve edge lengths; drop inconsistent samples early.
    bool consistent = true;
    for (int a = 0; a < 3 && consistent; ++a) {
      const int b = (a + 1) % 3;
      const double ds = (s_pts[a] - s_pts[b]).norm();
      const double dt = (t_pts[a] - t_pts[b]).norm();
      consistent = std::min(ds, dt) >= cfg.sac_edge_similarity * std::max(ds, dt);
    }
    if (!consistent) continue;

    RigidTransform t;
    try {
      t = shape(estimate_rigid_transform(s_pts, t_pts));
    } catch (const Error&) {
      continue;
    }
    const double s = score(t, best_score);
    if (s < best_score) {
      best_score = s;
      best = t;
    }
  }
  return best;
}

IcpResult icp(const PointCloud& source, const PointCloud& target,
              const RigidTransform& initial, const RegistrationConfig& cfg) {
  if (target.empty()) throw Error(ErrorCode::kTooFewPoints, "ICP target is empty");
  return icp(source, target, NeighborIndex(target), initial, cfg);
}

IcpResult icp(const PointCloud& source, const PointCloud& target,
              const NeighborIndex& target_index, const RigidTransform& initial,
              const RegistrationConfig& cfg) {
  if (source.size() < 3 || target.size() < 3) {
    throw Error(ErrorCode::kTooFewPoints, "ICP needs at least 3 points per cloud");
  }
  IcpResult result;
  RigidTransform current = initial;
  Pairing pairing =
      pair_points(source, target, target_index, current, cfg.icp_max_corr_distance);
  if (pairing.source.empty()) {
    throw Error(ErrorCode::kNoOverlap, "no point pairs within max correspondence distance");
  }
  result.transform = current;
  result.error_history.push_back(pairing.truncated_mse);

  for (std::size_t it = 0; it < cfg.icp_max_iterations; ++it) {
    if (pairing.source.size() < 3) break;
    RigidTransform step;
    try {
      step = estimate_rigid_transform(pairing.source, pairing.target);
    } catch (const Error&) {
      break;
    }
    const RigidTransform candidate = compose(step, current);
    Pairing next =
        pair_points(source, target, target_index, candidate, cfg.icp_max_corr_distance);
    ++result.iterations;
    // Reject any step that would raise the pairing error.
    if (next.source.empty() || next.truncated_mse > pairing.truncated_mse) break;
    current = candidate;
    pairing = std::move(next);
    result.transform = current;
    result.error_history.push_back(pairing.truncated_mse);
    if (step.translation.norm() < cfg.icp_translation_eps &&
        rotation_angle(step.rotation) < cfg.icp_rotation_eps) {
      result.converged = true;
      break;
    }
  }
  result.fitness = pairing.inlier_mse;
  result.inliers = pairing.source.size();
  return result;
}

ConditionedScan condition_scan(const PointCloud& scan, const PreprocessConfig& cfg) {
  ConditionedScan out;
  PointCloud cropped = crop_range(scan, cfg);
  out.cropped_count = cropped.size();
  if (cropped.size() < cfg.min_points) {
    throw Error(ErrorCode::kBelowMinPoints,
                std::to_string(cropped.size()) + " points after cropping, need " +
                    std::to_string(cfg.min_points));
  }
  if (cropped.size() > cfg.sor_k) {
    OutlierStats stats;
    cropped = remove_statistical_outliers(cropped, cfg.sor_k, cfg.sor_stddev_mult, &stats);
    out.outliers_removed = stats.removed;
  }
  out.cloud = voxel_downsample(cropped, cfg.voxel_leaf);
  return out;
}

RegistrationResult register_scans(const PointCloud& source, const PointCloud& target,
                                  const PreprocessConfig& pre_cfg,
                                  const RegistrationConfig& reg_cfg,
                                  RegistrationTiming* timing) {
  pre_cfg.validate();
  reg_cfg.validate();
  RegistrationTiming local_timing;
  RegistrationTiming& tm = timing ? *timing : local_timing;
  tm = {};

  if (anomaly_gate(source.size(), target.size(), pre_cfg.anomaly_ratio) ==
      GateVerdict::kReject) {
    throw Error(ErrorCode::kAnomalousScan,
                "point count jumped from " + std::to_string(source.size()) + " to " +
                    std::to_string(target.size()));
  }

  auto t0 = std::chrono::steady_clock::now();
  const ConditionedScan a = condition_scan(source, pre_cfg);
  const ConditionedScan b = condition_scan(target, pre_cfg);
  const NeighborIndex target_index(b.cloud);
  tm.preprocess = seconds_since(t0);

  RegistrationResult result;
  result.points_used_source = a.cloud.size();
  result.points_used_target = b.cloud.size();
  result.rejected_fraction =
      static_cast<double>(a.outliers_removed + b.outliers_removed) /
      static_cast<double>(a.cropped_count + b.cropped_count);

  RigidTransform guess = RigidTransform::identity();
  double guess_fitness = 0.0;
  std::size_t guess_inliers = 0;
  if (reg_cfg.use_initial_alignment) {
    t0 = std::chrono::steady_clock::now();
    const Eigen::Vector3d viewpoint = Eigen::Vector3d::Zero();
    const NeighborIndex source_index(a.cloud);
    const NormalCloud na =
        estimate_normals(a.cloud, source_index, reg_cfg.normal_k, viewpoint);
    const NormalCloud nb =
        estimate_normals(b.cloud, target_index, reg_cfg.normal_k, viewpoint);
    const auto da = compute_fpfh(a.cloud, na, source_index, reg_cfg.fpfh_radius);
    const auto db = compute_fpfh(b.cloud, nb, target_index, reg_cfg.fpfh_radius);
    tm.features = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto matches = match_features(da, db, reg_cfg.mutual_filter);
    std::vector<RigidTransform> extra;
    result.correspondence_rejected_fraction = 1.0;
    try {
      const auto kept = reject_correspondences_ransac(matches, a.cloud, b.cloud, reg_cfg);
      std::vector<Eigen::Vector3d> ks, kt;
      for (const auto& c : kept) {
        ks.push_back(a.cloud.points[c.source_index].position());
        kt.push_back(b.cloud.points[c.target_index].position());
      }
      extra.push_back(estimate_rigid_transform(ks, kt));
      result.correspondence_rejected_fraction =
          1.0 - static_cast<double>(kept.size()) / static_cast<double>(matches.size());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoConsensus &&
          e.code() != ErrorCode::kTooFewCorrespondences &&
          e.code() != ErrorCode::kDegenerateGeometry) {
        throw;
      }
    }
    guess = initial_align(a.cloud, b.cloud, da, db, reg_cfg, extra);
    tm.prealign = seconds_since(t0);
  }

  if (reg_cfg.use_fine_alignment) {
    t0 = std::chrono::steady_clock::now();
    const IcpResult refined = icp(a.cloud, b.cloud, target_index, guess, reg_cfg);
    tm.icp = seconds_since(t0);
    guess = refined.transform;
    guess_fitness = refined.fitness;
    guess_inliers = refined.inliers;
    result.icp_iterations = refined.iterations;
    result.stage = RegistrationStage::kRefined;
  } else {
    const Pairing p =
        pair_points(a.cloud, b.cloud, target_index, guess, reg_cfg.icp_max_corr_distance);
    if (p.source.empty()) {
      throw Error(ErrorCode::kNoOverlap, "no point pairs at the initial alignment");
    }
    guess_fitness = p.inlier_mse;
    guess_inliers = p.source.size();
    result.stage = RegistrationStage::kPrealigned;
  }

  result.motion = decompose(guess);
  result.motion.fitness = guess_fitness;
  result.motion.inlier_count = guess_inliers;
  return result;
}

}  // namespace lidarnav

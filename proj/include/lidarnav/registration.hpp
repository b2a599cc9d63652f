// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Full 6-DoF scan registration: FPFH correspondences, RANSAC correspondence
// rejection, sample-consensus initial alignment and point-to-point ICP.
//
// Every result maps the source scan onto the target scan: target ~= T * source.
// For scans taken from vehicle poses P_a and P_b this is T = P_b^-1 * P_a, the
// inverse of the vehicle's motion between the two captures.

#ifndef LIDARNAV_REGISTRATION_HPP_
#define LIDARNAV_REGISTRATION_HPP_

#include <cstdint>
#include <vector>

#include "lidarnav/features.hpp"
#include "lidarnav/geometry.hpp"
#include "lidarnav/neighbor_index.hpp"
#include "lidarnav/preprocess.hpp"

namespace lidarnav {

struct Correspondence {
  std::size_t source_index = 0;
  std::size_t target_index = 0;
  double feature_distance = 0.0;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct RegistrationConfig {
  bool use_initial_alignment = true;
  bool use_fine_alignment = true;
  std::size_t icp_max_iterations = 50;
  double icp_translation_eps = 1e-4;  // m
  double icp_rotation_eps = 1e-4;     // rad
  double icp_max_corr_distance = 2.0;  // m
  std::size_t ransac_iterations = 512;
  double ransac_inlier_threshold = 0.25;  // m
  // Initial guess and SAC hypotheses keep only yaw and x-y translation.
  bool constrain_planar_guess = true;
  bool mutual_filter = true;

  std::size_t normal_k = 16;
  double fpfh_radius = 1.0;  // m
  std::size_t sac_candidates = 3;          // nearest descriptors per sample
  double sac_min_sample_distance = 1.0;    // m between sampled source points
  double sac_edge_similarity = 0.9;        // sample pre-rejection
  double sac_truncation = 1.0;             // m, per-point score cap
  std::size_t sac_score_points = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class RegistrationStage { kPrealigned, kRefined };

struct RegistrationResult {
  PosedTransform motion;
  RegistrationStage stage = RegistrationStage::kPrealigned;
  std::size_t points_used_source = 0;
  std::size_t points_used_target = 0;
  // Share of cropped points dropped by statistical outlier removal.
  double rejected_fraction = 0.0;
  // Share of feature correspondences rejected by RANSAC (1 when none survive).
  double correspondence_rejected_fraction = 0.0;
  std::size_t icp_iterations = 0;
};

/// Nearest target descriptor (Euclidean, 33-D) for every usable source
/// descriptor; with `mutual`, keeps only pairs that are each other's nearest.
/// Throws kNoUsableDescriptors when either side has none.
std::vector<Correspondence> match_features(const std::vector<FpfhDescriptor>& source,
                                           const std::vector<FpfhDescriptor>& target,
                                           bool mutual = true);

/// Largest consensus set under 3-point RANSAC hypotheses, in input order.
std::vector<Correspondence> reject_correspondences_ransac(
    const std::vector<Correspondence>& correspondences, const PointCloud& source,
    const PointCloud& target, const RegistrationConfig& cfg);

/// Sample-consensus initial alignment. The planar identity and any
/// `extra_hypotheses` are scored alongside the sampled ones.
RigidTransform initial_align(const PointCloud& source, const PointCloud& target,
                             const std::vector<FpfhDescriptor>& source_desc,
                             const std::vector<FpfhDescriptor>& target_desc,
                             const RegistrationConfig& cfg,
                             const std::vector<RigidTransform>& extra_hypotheses = {});

struct IcpResult {
  RigidTransform transform;
  double fitness = 0.0;  // mean squared inlier distance at `transform`
  std::size_t inliers = 0;
  std::size_t iterations = 0;
  bool converged = false;
  // Truncated mean squared pairing error per accepted iteration; the last
  // entry belongs to `transform`. Non-increasing by construction.
  std::vector<double> error_history;
};

/// Throws kNoOverlap when no source point pairs within icp_max_corr_distance.
IcpResult icp(const PointCloud& source, const PointCloud& target,
              const RigidTransform& initial, const RegistrationConfig& cfg);
IcpResult icp(const PointCloud& source, const PointCloud& target,
              const NeighborIndex& target_index, const RigidTransform& initial,
              const RegistrationConfig& cfg);

struct ConditionedScan {
  PointCloud cloud;
  std::size_t cropped_count = 0;
  std::size_t outliers_removed = 0;
};

/// Crop, min-point check, outlier removal and voxel grid.
ConditionedScan condition_scan(const PointCloud& scan, const PreprocessConfig& cfg);

struct RegistrationTiming {
  double preprocess = 0.0;  // seconds
  double features = 0.0;
  double prealign = 0.0;
  double icp = 0.0;
};

/// Whole chain. Throws kAnomalousScan, kBelowMinPoints, kNoOverlap,
/// kNoUsableDescriptors.
RegistrationResult register_scans(const PointCloud& source, const PointCloud& target,
                                  const PreprocessConfig& pre_cfg,
                                  const RegistrationConfig& reg_cfg,
                                  RegistrationTiming* timing = nullptr);

}  // namespace lidarnav

#endif  // LIDARNAV_REGISTRATION_HPP_

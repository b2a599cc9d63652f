// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end runs: scan-to-scan odometry with either method, failure
// bridging, GPS fusion and metrics; plus the per-stage timing benchmark.

#ifndef LIDARNAV_PIPELINE_HPP_
#define LIDARNAV_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lidarnav/config.hpp"
#include "lidarnav/metrics.hpp"
#include "lidarnav/sim.hpp"

namespace lidarnav {

/// Scans loaded on demand plus the GPS log and optional truth.
struct ScanSequence {
  std::vector<double> stamps;
  std::function<PointCloud(std::size_t)> load;
  std::vector<GpsEvent> gps;
  std::string gps_source = "gps.log";
  std::vector<std::size_t> gps_lines;  // per event; empty means 1, 2, ...
  std::vector<LocalPose> truth;
  std::uint64_t seed = 0;
  std::optional<GeoReference> reference;  // geodetic origin of the truth frame

  std::size_t size() const { return stamps.size(); }
};

/// The reader / run must outlive the returned sequence.
ScanSequence make_sequence(const DatasetReader& reader);
ScanSequence make_sequence(const SimRun& run);
ScanSequence make_sequence(const SimDataset& data);

enum class PairStatus { kMatched, kBridged, kFrozen };
std::string_view pair_status_name(PairStatus s);

struct StageTimes {
  double preprocess = 0.0;  // full6d stages
  double features = 0.0;
  double prealign = 0.0;
  double icp = 0.0;
  double project = 0.0;  // planar stages
  double rotate_correlate = 0.0;
  double total = 0.0;
};

/// Outcome for the pair scan[index] -> scan[index + 1].
struct PairRecord {
  std::size_t index = 0;
  double t = 0.0;  // stamp of scan[index + 1]
  PairStatus status = PairStatus::kMatched;
  std::string failure;     // error code name when not matched
  std::size_t keyframe = 0;  // scan the target was matched against
  PlanarMotion motion;       // vehicle motion used for the pair
  double score = 0.0;        // planar peak, or full6d fitness (m^2)
  std::size_t points_source = 0;
  std::size_t points_target = 0;
  double rejected_fraction = 0.0;  // full6d outlier share
  StageTimes times;                // wall clock, not deterministic
};

struct StageSummary {
  std::string stage;
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double min = 0.0;
};

struct RunReport {
  Method method = Method::kFull6d;
  std::vector<LocalPose> trajectory;  // fused output, one per event
  std::vector<LocalPose> odometry;    // scan matching alone, one per scan
  std::vector<LocalPose> gps_track;   // every fix in the local frame
  std::vector<GpsTrust> gps_trust;    // verdict per fix
  std::vector<bool> dead_reckoning_only;  // per trajectory sample
  std::vector<PairRecord> per_pair;
  std::vector<LocalPose> truth;
  GeoReference reference;
  bool has_metrics = false;
  Metrics odometry_metrics;  // vs truth, when truth is present
  Metrics fused_metrics;
  std::vector<StageSummary> timing;
};

/// Throws kInvalidArgument for a bad config or fewer than two scans, and
/// FormatError for unparsable GPS lines.
RunReport run_pipeline(const ScanSequence& seq, const PipelineConfig& cfg);
/// Throws kDatasetNotFound or FormatError as well.
RunReport run_pipeline(const std::filesystem::path& dataset, const PipelineConfig& cfg);

/// Motion composition in the vehicle frame: a then b.
PlanarMotion compose_motion(const PlanarMotion& a, const PlanarMotion& b);
PlanarMotion invert_motion(const PlanarMotion& m);

struct BenchPair {
  std::size_t index = 0;
  std::size_t points = 0;  // source scan size
  std::size_t bucket = 0;
  std::string failure;
  StageTimes mean;
  double min_total = 0.0;
};

struct BenchBucket {
  std::string label;
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
  std::size_t pairs = 0;
  double mean_total = 0.0;
  double min_total = 0.0;
};

struct BenchReport {
  Method method = Method::kFull6d;
  std::size_t repetitions = 0;
  std::vector<BenchPair> pairs;
  std::vector<BenchBucket> buckets;  // only non-empty buckets
  double end_to_end_hz = 0.0;        // pairs per second of matching
  double bucket_spearman = 0.0;      // bucket order vs mean time
};

/// Point-count bucket edges: <6k, 6-10k, 10-14k, 14-18k, 18-22k, 22-27k, >=27k.
std::vector<std::size_t> bench_bucket_edges();

/// Matches every consecutive pair `repetitions` times with scans already in
/// memory, so file parsing is not timed. Failures are timed like successes.
BenchReport benchmark(const ScanSequence& seq, Method method, const PipelineConfig& cfg,
                      std::size_t repetitions);

}  // namespace lidarnav

#endif  // LIDARNAV_PIPELINE_HPP_

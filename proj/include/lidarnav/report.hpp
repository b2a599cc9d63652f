// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Text artifacts for runs and benchmarks: CSV tables and SVG line charts.
// Everything except timing.csv and bench.csv is a pure function of the
// report, so repeated runs produce identical files.

#ifndef LIDARNAV_REPORT_HPP_
#define LIDARNAV_REPORT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lidarnav/pipeline.hpp"

namespace lidarnav {

void write_trajectory_csv(std::ostream& out, const std::vector<LocalPose>& poses);
/// Reads `t,x,y,yaw` rows with an optional trailing source column and an
/// optional header line. Throws kDatasetNotFound or FormatError.
std::vector<LocalPose> read_trajectory_csv(const std::filesystem::path& path);
void write_per_pair_csv(std::ostream& out, const RunReport& report);
/// One row each for the odometry and fused tracks. Throughput is left out
/// because it is wall-clock.
void write_metrics_csv(std::ostream& out, const RunReport& report);
void write_timing_csv(std::ostream& out, const std::vector<StageSummary>& timing);
void write_bench_csv(std::ostream& out, const BenchReport& bench);
void write_bench_buckets_csv(std::ostream& out, const BenchReport& bench);

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // dots instead of a polyline
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool equal_axes = false;
  int width = 720;
  int height = 480;
};

void write_svg_chart(std::ostream& out, const std::vector<Series>& series,
                     const ChartOptions& options);

/// trajectory.csv, odometry.csv, gps.csv, per_pair.csv, metrics.csv,
/// timing.csv and the three SVG charts. Creates `dir` if needed.
void write_run_outputs(const std::filesystem::path& dir, const RunReport& report);

}  // namespace lidarnav

#endif  // LIDARNAV_REPORT_HPP_

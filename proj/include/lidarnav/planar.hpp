// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reduced 3-DoF matching: clouds are projected onto the x-y plane as
// images, and (yaw, x, y) is recovered by sweeping candidate yaws and phase
// correlating each rotated image against the other.
//
// Pixel convention: column = width/2 + round(x / resolution),
// row = height/2 - round(y / resolution). Pixel shifts are (column, row).
// Like register_scans, match results map the source onto the target.

#ifndef LIDARNAV_PLANAR_HPP_
#define LIDARNAV_PLANAR_HPP_

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "lidarnav/geometry.hpp"
#include "lidarnav/preprocess.hpp"

namespace lidarnav {

enum class ValueMode { kCount, kMaxIntensity };

struct ProjectionCanvas {
  int width = 256;
  int height = 256;
  double resolution = 0.5;  // m per pixel
  ValueMode value_mode = ValueMode::kCount;
  int saturation = 16;  // per-pixel count cap in count mode

  void validate() const;  // even sides >= 32, resolution > 0
  int center_col() const { return width / 2; }
  int center_row() const { return height / 2; }
};

struct ProjectionImage {
  ProjectionCanvas canvas;
  std::vector<double> values;  // row-major, height x width
  std::size_t point_count_used = 0;

  double at(int row, int col) const { return values[row * canvas.width + col]; }
  double& at(int row, int col) { return values[row * canvas.width + col]; }
  double max_value() const;
};

struct PlanarMotion {
  double yaw = 0.0;  // rad
  double dx = 0.0;   // m
  double dy = 0.0;   // m
  double score = 0.0;  // normalized correlation peak in [0, 1]

  RigidTransform to_transform() const;
};

struct PixelShift {
  double dx_px = 0.0;  // columns
  double dy_px = 0.0;  // rows
  double peak = 0.0;
};

struct CorrelationOptions {
  bool window = false;    // raised-cosine taper before the transform
  bool subpixel = false;  // parabolic peak refinement
};

ProjectionImage make_image(const ProjectionCanvas& canvas);

/// Points that fall outside the canvas are dropped; z is ignored.
ProjectionImage project_to_image(const PointCloud& cloud, const ProjectionCanvas& canvas);

/// Shift of `b` relative to `a`: b(row, col) ~= a(row - dy, col - dx), via the
/// normalized cross-power spectrum. Throws kDimensionMismatch.
PixelShift phase_correlate(const ProjectionImage& a, const ProjectionImage& b,
                           const CorrelationOptions& options = {});

/// Rotates image content by `yaw` (counter-clockwise in the x-y frame) about
/// the canvas center with bilinear resampling.
ProjectionImage rotate_image(const ProjectionImage& image, double yaw);

/// Circular shift by whole pixels, for tests and diagnostics.
ProjectionImage circular_shift(const ProjectionImage& image, int dx_px, int dy_px);

struct PlanarTiming {
  double project = 0.0;  // seconds
  double rotate_correlate = 0.0;
};

/// Exhaustive yaw sweep over k * yaw_step for |k * yaw_step| <= yaw_range.
/// Each candidate rotates `a` about the canvas center and phase correlates it
/// against `b`; the best peak wins, ties going to the smaller |yaw|.
PlanarMotion rotation_search(const ProjectionImage& a, const ProjectionImage& b,
                             double yaw_range, double yaw_step,
                             const CorrelationOptions& options = {true, false},
                             PlanarTiming* timing = nullptr);

/// Same sweep, but each candidate rotates the source points and projects them
/// afresh, so there is no resampling blur. Used by match_planar.
PlanarMotion rotation_search(const PointCloud& source, const ProjectionImage& b,
                             double yaw_range, double yaw_step,
                             const CorrelationOptions& options = {true, false},
                             PlanarTiming* timing = nullptr);

struct PlanarConfig {
  ProjectionCanvas canvas;
  double yaw_range = 0.17453292519943295;    // 10 deg
  double yaw_step = 0.004363323129985824;    // 0.25 deg
  double min_peak = 0.35;
  bool subpixel = false;

  void validate() const;
};

/// Crop and anomaly gate only, then project and search. Throws
/// kAnomalousScan, or LowConfidenceError when the peak is below min_peak.
PlanarMotion match_planar(const PointCloud& source, const PointCloud& target,
                          const PlanarConfig& cfg, const PreprocessConfig& pre_cfg,
                          PlanarTiming* timing = nullptr);

/// Plain PGM (P2). maxval is the saturation in count mode; intensity images
/// are scaled to 0..255.
void write_pgm(std::ostream& out, const ProjectionImage& image);

}  // namespace lidarnav

#endif  // LIDARNAV_PLANAR_HPP_

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration and its `key = value` file form. Every tunable default
// of the library is reachable through a dotted key such as
// `registration.icp_max_iterations` or `fusion.jump_gate`.

#ifndef LIDARNAV_CONFIG_HPP_
#define LIDARNAV_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lidarnav/navfusion.hpp"
#include "lidarnav/planar.hpp"
#include "lidarnav/preprocess.hpp"
#include "lidarnav/registration.hpp"
#include "lidarnav/sim.hpp"

namespace lidarnav {

enum class Method { kFull6d, kPlanar };
std::string_view method_name(Method m);
/// "full6d" or "planar"; throws kInvalidArgument otherwise.
Method parse_method(std::string_view name);

struct PipelineConfig {
  Method method = Method::kFull6d;
  PreprocessConfig preprocess;
  RegistrationConfig registration;
  PlanarConfig planar;
  FusionConfig fusion;
  // Scans are matched against a keyframe until it lies farther than this
  // (m) or the match disagrees with the prediction by more than
  // keyframe_gate (m). 0 matches consecutive scans only.
  double keyframe_distance = 5.0;
  double keyframe_gate = 1.0;
  double initial_yaw = 0.0;  // rad; there is no compass
  std::optional<GeoReference> reference;  // default: first GPS fix
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimConfig {
  std::string scene = "bridge_crossing";  // bundled name or scene file path
  int beam_count = 32;
  double elevation_top_deg = 10.67;
  double elevation_bottom_deg = -30.67;
  double azimuth_step_deg = 0.2;
  double max_range = 80.0;
  double range_noise_sigma = 0.02;
  double dropout_prob = 0.02;
  double mount_height = 2.0;
  GpsCorruptionModel gps;
  SimOptions options;
  double start_x = 100.0;
  double start_y = 0.0;
  double heading_deg = 0.0;
  double speed = 2.0;      // m/s
  double duration = 60.0;  // s
  std::uint64_t seed = 0;

  LidarModel lidar_model() const;
  std::vector<LocalPose> trajectory() const;
  Scene load_scene() const;
};

struct AppConfig {
  PipelineConfig pipeline;
  SimConfig sim;
};

/// Sets one dotted key. Throws kInvalidArgument for unknown keys or values
/// that do not parse.
void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value);

/// `key = value` lines; blank lines and `#` comments are ignored. Throws
/// FormatError(name, line) on any bad line.
void apply_config(AppConfig& cfg, std::istream& in, const std::string& name);
/// Throws kDatasetNotFound if the file cannot be opened.
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);

/// Every key with its current value, one per line, re-readable by apply_config.
void write_config(std::ostream& out, const AppConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace lidarnav

#endif  // LIDARNAV_CONFIG_HPP_

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic canal scenes, a spinning multi-beam LiDAR ray caster, and a GPS
// corruption model producing GGA sentences with blackouts and multipath.

#ifndef LIDARNAV_SIM_HPP_
#define LIDARNAV_SIM_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lidarnav/geometry.hpp"
#include "lidarnav/navfusion.hpp"
#include "lidarnav/random.hpp"

namespace lidarnav {

enum class PrimitiveKind { kWall, kPillar, kDeck, kGirder };
std::string_view primitive_kind_name(PrimitiveKind k);

/// Box of size (lx, ly, lz) centred at `center`, rotated by `yaw` about z.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kWall;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double reflectivity = 0.5;

  double bottom() const { return center.z() - 0.5 * size.z(); }
};

struct Scene {
  std::string name;
  std::vector<Primitive> primitives;

  /// Positive sizes, reflectivity in [0, 1], and only walls below z = 0.
  void validate() const;
};

/// One primitive per line: `KIND x y z yaw lx ly lz reflectivity`, yaw in
/// degrees. Blank lines and `#` comments are skipped.
Scene read_scene(std::istream& in, const std::string& name = "<scene>");
Scene read_scene(const std::filesystem::path& path);
void write_scene(std::ostream& out, const Scene& scene);

/// open_water, canal_walls, bridge_crossing, lock.
std::vector<std::string> bundled_scene_names();
Scene bundled_scene(std::string_view name);

struct LidarModel {
  std::vector<double> beam_elevations;  // rad
  double azimuth_step = 0.0;            // rad
  double max_range = 80.0;
  double min_range = 0.5;
  double range_noise_sigma = 0.02;
  double dropout_prob = 0.02;
  double mount_height = 2.0;

  /// 32 beams from +10.67 to -30.67 deg, 0.2 deg azimuth step.
  static LidarModel hdl32();
  std::size_t azimuth_count() const;
  void validate() const;
};

/// Ray casts one sweep from `pose` (sensor at z = mount_height). Points are
/// in the sensor frame; the water plane z = 0 absorbs every beam reaching it.
PointCloud raycast_scan(const Scene& scene, const LocalPose& pose, const LidarModel& model,
                        std::uint64_t seed);

struct BlackoutWindow {
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Bias of constant magnitude whose direction turns once per period, so
/// reported positions sweep a circle of radius `amplitude` around the truth.
struct MultipathWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  double amplitude = 8.0;  // m
  double period = 20.0;    // s
};

struct GpsCorruptionModel {
  std::vector<BlackoutWindow> blackouts;
  std::vector<MultipathWindow> multipath;
  double base_noise_sigma = 0.3;  // m per axis
  double base_hdop = 0.9;
  GeoReference reference{45.0, 15.0};
  int satellites = 10;

  void validate() const;
  bool in_blackout(double t) const;
  const MultipathWindow* multipath_at(double t) const;
};

/// Sentence for the true pose at time t, or nothing during a blackout.
std::optional<std::string> corrupt_gps(const LocalPose& truth, double t,
                                       const GpsCorruptionModel& model, Rng& rng);

struct SimOptions {
  double scan_period = 0.1;
  double gps_period = 1.0;
};

struct GpsEvent {
  double t = 0.0;
  std::string sentence;
};

struct SimDataset {
  std::vector<PointCloud> scans;
  std::vector<GpsEvent> gps_log;  // blackout epochs are absent
  std::vector<LocalPose> truth;   // one per scan
  std::uint64_t seed = 0;
  GeoReference reference;  // geodetic origin of the truth frame
};

/// Pose at time t by linear interpolation (shortest-arc yaw); clamps outside.
LocalPose interpolate_pose(const std::vector<LocalPose>& trajectory, double t);

/// Straight run from (x0, y0) along `yaw` at constant speed over [t0, t1].
std::vector<LocalPose> straight_trajectory(double x0, double y0, double yaw, double speed,
                                           double t0, double t1);

/// Lazily generated run: scans are produced on demand, each from its own RNG
/// stream, so any subset can be generated in any order with identical output.
class SimRun {
 public:
  SimRun(Scene scene, std::vector<LocalPose> trajectory, LidarModel lidar,
         GpsCorruptionModel gps, std::uint64_t seed, SimOptions options = {});

  std::size_t scan_count() const { return stamps_.size(); }
  const std::vector<double>& stamps() const { return stamps_; }
  const std::vector<LocalPose>& truth() const { return truth_; }
  const std::vector<GpsEvent>& gps_log() const { return gps_log_; }
  std::uint64_t seed() const { return seed_; }
  const GeoReference& reference() const { return reference_; }
  const Scene& scene() const { return scene_; }
  PointCloud scan(std::size_t i) const;
  SimDataset materialize() const;

 private:
  Scene scene_;
  LidarModel lidar_;
  std::uint64_t seed_;
  GeoReference reference_;
  std::vector<double> stamps_;
  std::vector<LocalPose> truth_;
  std::vector<GpsEvent> gps_log_;
};

/// Throws kEmptyTrajectory for an empty trajectory or one shorter than a
/// scan period, kInvalidArgument if it is not time-ordered.
SimDataset simulate_run(const Scene& scene, const std::vector<LocalPose>& trajectory,
                        const LidarModel& lidar, const GpsCorruptionModel& gps,
                        std::uint64_t seed, const SimOptions& options = {});

/// On-disk dataset: manifest.csv, scans/NNNNNN.cloud, gps.log, truth.csv,
/// seed.txt and reference.txt. Only the manifest and scans are required.
/// Scans are read on demand.
class DatasetReader {
 public:
  /// Throws kDatasetNotFound or FormatError.
  explicit DatasetReader(const std::filesystem::path& dir);

  std::size_t scan_count() const { return stamps_.size(); }
  const std::vector<double>& stamps() const { return stamps_; }
  const std::vector<GpsEvent>& gps_log() const { return gps_log_; }
  const std::vector<LocalPose>& truth() const { return truth_; }
  std::uint64_t seed() const { return seed_; }
  PointCloud scan(std::size_t i) const;
  /// Line number of the i-th GPS event in gps.log, for error reporting.
  std::size_t gps_line(std::size_t i) const { return gps_lines_.at(i); }
  const std::filesystem::path& dir() const { return dir_; }
  /// From reference.txt ("lat lon"), when present.
  const std::optional<GeoReference>& reference() const { return reference_; }

 private:
  std::filesystem::path dir_;
  std::vector<double> stamps_;
  std::vector<std::filesystem::path> files_;
  std::vector<GpsEvent> gps_log_;
  std::vector<std::size_t> gps_lines_;
  std::vector<LocalPose> truth_;
  std::uint64_t seed_ = 0;
  std::optional<GeoReference> reference_;
};

void write_dataset(const std::filesystem::path& dir, const SimRun& run);
void write_dataset(const std::filesystem::path& dir, const SimDataset& data);

}  // namespace lidarnav

#endif  // LIDARNAV_SIM_HPP_

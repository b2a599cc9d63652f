// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
  throw Error(ErrorCode::kInvalidArgument,
              std::string(key) + ": '" + std::string(value) + "' is not " + what);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

template <class T>
T to_unsigned(std::string_view key, std::string_view v) {
  T out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string from_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<BlackoutWindow> to_blackouts(std::string_view key, std::string_view v) {
  std::vector<BlackoutWindow> out;
  if (v.empty() || v == "none") return out;
  for (auto item : split(v, ',')) {
    const auto f = split(item, ':');
    if (f.size() != 2) bad_value(key, item, "a 'start:end' window");
    out.push_back({to_double(key, f[0]), to_double(key, f[1])});
  }
  return out;
}

std::vector<MultipathWindow> to_multipath(std::string_view key, std::string_view v) {
  std::vector<MultipathWindow> out;
  if (v.empty() || v == "none") return out;
  for (auto item : split(v, ',')) {
    const auto f = split(item, ':');
    if (f.size() < 2 || f.size() > 4) {
      bad_value(key, item, "a 'start:end[:amplitude[:period]]' window");
    }
    MultipathWindow w;
    w.t_start = to_double(key, f[0]);
    w.t_end = to_double(key, f[1]);
    if (f.size() > 2) w.amplitude = to_double(key, f[2]);
    if (f.size() > 3) w.period = to_double(key, f[3]);
    out.push_back(w);
  }
  return out;
}

struct Entry {
  std::string key;
  std::function<void(AppConfig&, std::string_view)> set;
  std::function<std::string(const AppConfig&)> get;
};

// `ref` is a generic lambda returning a reference to the field.
template <class Ref>
Entry real(std::string key, Ref ref) {
  return {key, [key, ref](AppConfig& c, std::string_view v) { ref(c) = to_double(key, v); },
          [ref](const AppConfig& c) { return from_double(ref(c)); }};
}

template <class Ref>
Entry degrees(std::string key, Ref ref) {
  return {key,
          [key, ref](AppConfig& c, std::string_view v) { ref(c) = deg2rad(to_double(key, v)); },
          [ref](const AppConfig& c) { return from_double(rad2deg(ref(c))); }};
}

template <class Ref>
Entry count(std::string key, Ref ref) {
  return {key,
          [key, ref](AppConfig& c, std::string_view v) {
            auto& field = ref(c);
            field = to_unsigned<std::remove_reference_t<decltype(field)>>(key, v);
          },
          [ref](const AppConfig& c) { return std::to_string(ref(c)); }};
}

template <class Ref>
Entry integer(std::string key, Ref ref) {
  return {key, [key, ref](AppConfig& c, std::string_view v) { ref(c) = to_int(key, v); },
          [ref](const AppConfig& c) { return std::to_string(ref(c)); }};
}

template <class Ref>
Entry flag(std::string key, Ref ref) {
  return {key, [key, ref](AppConfig& c, std::string_view v) { ref(c) = to_bool(key, v); },
          [ref](const AppConfig& c) { return std::string(ref(c) ? "true" : "false"); }};
}

#define LN_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back({"pipeline.method",
                 [](AppConfig& c, std::string_view v) { c.pipeline.method = parse_method(v); },
                 [](const AppConfig& c) { return std::string(method_name(c.pipeline.method)); }});
    t.push_back(real("pipeline.keyframe_distance", LN_REF(pipeline.keyframe_distance)));
    t.push_back(real("pipeline.keyframe_gate", LN_REF(pipeline.keyframe_gate)));
    t.push_back(degrees("pipeline.initial_yaw_deg", LN_REF(pipeline.initial_yaw)));
    t.push_back({"pipeline.reference",
                 [](AppConfig& c, std::string_view v) {
                   if (v == "auto") {
                     c.pipeline.reference.reset();
                     return;
                   }
                   const auto f = split(v, ',');
                   if (f.size() != 2) bad_value("pipeline.reference", v, "'auto' or 'lat,lon'");
                   c.pipeline.reference =
                       GeoReference{to_double("pipeline.reference", f[0]),
                                    to_double("pipeline.reference", f[1])};
                 },
                 [](const AppConfig& c) {
                   if (!c.pipeline.reference) return std::string("auto");
                   return from_double(c.pipeline.reference->latitude) + "," +
                          from_double(c.pipeline.reference->longitude);
                 }});
    t.push_back(count("pipeline.seed", LN_REF(pipeline.seed)));

    t.push_back(real("preprocess.min_range", LN_REF(pipeline.preprocess.min_range)));
    t.push_back(real("preprocess.max_range", LN_REF(pipeline.preprocess.max_range)));
    t.push_back(real("preprocess.voxel_leaf", LN_REF(pipeline.preprocess.voxel_leaf)));
    t.push_back(count("preprocess.sor_k", LN_REF(pipeline.preprocess.sor_k)));
    t.push_back(real("preprocess.sor_stddev_mult", LN_REF(pipeline.preprocess.sor_stddev_mult)));
    t.push_back(real("preprocess.anomaly_ratio", LN_REF(pipeline.preprocess.anomaly_ratio)));
    t.push_back(count("preprocess.min_points", LN_REF(pipeline.preprocess.min_points)));

    t.push_back(flag("registration.use_initial_alignment",
                     LN_REF(pipeline.registration.use_initial_alignment)));
    t.push_back(flag("registration.use_fine_alignment",
                     LN_REF(pipeline.registration.use_fine_alignment)));
    t.push_back(count("registration.icp_max_iterations",
                      LN_REF(pipeline.registration.icp_max_iterations)));
    t.push_back(real("registration.icp_translation_eps",
                     LN_REF(pipeline.registration.icp_translation_eps)));
    t.push_back(real("registration.icp_rotation_eps",
                     LN_REF(pipeline.registration.icp_rotation_eps)));
    t.push_back(real("registration.icp_max_corr_distance",
                     LN_REF(pipeline.registration.icp_max_corr_distance)));
    t.push_back(count("registration.ransac_iterations",
                      LN_REF(pipeline.registration.ransac_iterations)));
    t.push_back(real("registration.ransac_inlier_threshold",
                     LN_REF(pipeline.registration.ransac_inlier_threshold)));
    t.push_back(flag("registration.constrain_planar_guess",
                     LN_REF(pipeline.registration.constrain_planar_guess)));
    t.push_back(flag("registration.mutual_filter", LN_REF(pipeline.registration.mutual_filter)));
    t.push_back(count("registration.normal_k", LN_REF(pipeline.registration.normal_k)));
    t.push_back(real("registration.fpfh_radius", LN_REF(pipeline.registration.fpfh_radius)));
    t.push_back(count("registration.sac_candidates", LN_REF(pipeline.registration.sac_candidates)));
    t.push_back(real("registration.sac_min_sample_distance",
                     LN_REF(pipeline.registration.sac_min_sample_distance)));
    t.push_back(real("registration.sac_edge_similarity",
                     LN_REF(pipeline.registration.sac_edge_similarity)));
    t.push_back(real("registration.sac_truncation", LN_REF(pipeline.registration.sac_truncation)));
    t.push_back(count("registration.sac_score_points",
                      LN_REF(pipeline.registration.sac_score_points)));

    t.push_back(integer("planar.width", LN_REF(pipeline.planar.canvas.width)));
    t.push_back(integer("planar.height", LN_REF(pipeline.planar.canvas.height)));
    t.push_back(real("planar.resolution", LN_REF(pipeline.planar.canvas.resolution)));
    t.push_back({"planar.value_mode",
                 [](AppConfig& c, std::string_view v) {
                   if (v == "count") {
                     c.pipeline.planar.canvas.value_mode = ValueMode::kCount;
                   } else if (v == "max_intensity") {
                     c.pipeline.planar.canvas.value_mode = ValueMode::kMaxIntensity;
                   } else {
                     bad_value("planar.value_mode", v, "'count' or 'max_intensity'");
                   }
                 },
                 [](const AppConfig& c) {
                   return std::string(c.pipeline.planar.canvas.value_mode == ValueMode::kCount
                                          ? "count"
                                          : "max_intensity");
                 }});
    t.push_back(integer("planar.saturation", LN_REF(pipeline.planar.canvas.saturation)));
    t.push_back(degrees("planar.yaw_range_deg", LN_REF(pipeline.planar.yaw_range)));
    t.push_back(degrees("planar.yaw_step_deg", LN_REF(pipeline.planar.yaw_step)));
    t.push_back(real("planar.min_peak", LN_REF(pipeline.planar.min_peak)));
    t.push_back(flag("planar.subpixel", LN_REF(pipeline.planar.subpixel)));

    t.push_back(real("fusion.hdop_threshold", LN_REF(pipeline.fusion.hdop_threshold)));
    t.push_back(real("fusion.jump_gate", LN_REF(pipeline.fusion.jump_gate)));
    t.push_back(real("fusion.gate_growth", LN_REF(pipeline.fusion.gate_growth)));
    t.push_back(real("fusion.max_speed", LN_REF(pipeline.fusion.max_speed)));
    t.push_back(integer("fusion.reanchor_blend", LN_REF(pipeline.fusion.reanchor_blend)));
    t.push_back(real("fusion.gps_timeout", LN_REF(pipeline.fusion.gps_timeout)));
    t.push_back(real("fusion.max_dead_reckoning", LN_REF(pipeline.fusion.max_dead_reckoning)));

    t.push_back({"sim.scene", [](AppConfig& c, std::string_view v) { c.sim.scene = v; },
                 [](const AppConfig& c) { return c.sim.scene; }});
    t.push_back(integer("lidar.beam_count", LN_REF(sim.beam_count)));
    t.push_back(real("lidar.elevation_top_deg", LN_REF(sim.elevation_top_deg)));
    t.push_back(real("lidar.elevation_bottom_deg", LN_REF(sim.elevation_bottom_deg)));
    t.push_back(real("lidar.azimuth_step_deg", LN_REF(sim.azimuth_step_deg)));
    t.push_back(real("lidar.max_range", LN_REF(sim.max_range)));
    t.push_back(real("lidar.range_noise_sigma", LN_REF(sim.range_noise_sigma)));
    t.push_back(real("lidar.dropout_prob", LN_REF(sim.dropout_prob)));
    t.push_back(real("lidar.mount_height", LN_REF(sim.mount_height)));
    t.push_back({"gps.blackouts",
                 [](AppConfig& c, std::string_view v) {
                   c.sim.gps.blackouts = to_blackouts("gps.blackouts", v);
                 },
                 [](const AppConfig& c) {
                   std::string s;
                   for (const auto& w : c.sim.gps.blackouts) {
                     if (!s.empty()) s += ',';
                     s += from_double(w.t_start) + ":" + from_double(w.t_end);
                   }
                   return s.empty() ? std::string("none") : s;
                 }});
    t.push_back({"gps.multipath",
                 [](AppConfig& c, std::string_view v) {
                   c.sim.gps.multipath = to_multipath("gps.multipath", v);
                 },
                 [](const AppConfig& c) {
                   std::string s;
                   for (const auto& w : c.sim.gps.multipath) {
                     if (!s.empty()) s += ',';
                     s += from_double(w.t_start) + ":" + from_double(w.t_end) + ":" +
                          from_double(w.amplitude) + ":" + from_double(w.period);
                   }
                   return s.empty() ? std::string("none") : s;
                 }});
    t.push_back(real("gps.base_noise_sigma", LN_REF(sim.gps.base_noise_sigma)));
    t.push_back(real("gps.base_hdop", LN_REF(sim.gps.base_hdop)));
    t.push_back(real("gps.ref_lat", LN_REF(sim.gps.reference.latitude)));
    t.push_back(real("gps.ref_lon", LN_REF(sim.gps.reference.longitude)));
    t.push_back(integer("gps.satellites", LN_REF(sim.gps.satellites)));
    t.push_back(real("sim.scan_period", LN_REF(sim.options.scan_period)));
    t.push_back(real("sim.gps_period", LN_REF(sim.options.gps_period)));
    t.push_back(real("sim.start_x", LN_REF(sim.start_x)));
    t.push_back(real("sim.start_y", LN_REF(sim.start_y)));
    t.push_back(real("sim.heading_deg", LN_REF(sim.heading_deg)));
    t.push_back(real("sim.speed", LN_REF(sim.speed)));
    t.push_back(real("sim.duration", LN_REF(sim.duration)));
    t.push_back(count("sim.seed", LN_REF(sim.seed)));
    return t;
  }();
  return table;
}

#undef LN_REF

}  // namespace

std::string_view method_name(Method m) {
  return m == Method::kFull6d ? "full6d" : "planar";
}

Method parse_method(std::string_view name) {
  if (name == "full6d") return Method::kFull6d;
  if (name == "planar") return Method::kPlanar;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown method '" + std::string(name) + "' (expected full6d or planar)");
}

void PipelineConfig::validate() const {
  preprocess.validate();
  registration.validate();
  planar.validate();
  fusion.validate();
  if (!(keyframe_distance >= 0.0) || !(keyframe_gate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "keyframe_distance must be >= 0 and keyframe_gate > 0");
  }
  if (!std::isfinite(initial_yaw)) {
    throw Error(ErrorCode::kInvalidArgument, "initial yaw must be finite");
  }
}

LidarModel SimConfig::lidar_model() const {
  if (beam_count < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one beam");
  LidarModel m;
  m.beam_elevations.resize(beam_count);
  for (int i = 0; i < beam_count; ++i) {
    const double u = beam_count == 1 ? 0.0 : static_cast<double>(i) / (beam_count - 1);
    m.beam_elevations[i] = deg2rad(elevation_top_deg + u * (elevation_bottom_deg - elevation_top_deg));
  }
  m.azimuth_step = deg2rad(azimuth_step_deg);
  m.max_range = max_range;
  m.range_noise_sigma = range_noise_sigma;
  m.dropout_prob = dropout_prob;
  m.mount_height = mount_height;
  m.validate();
  return m;
}

std::vector<LocalPose> SimConfig::trajectory() const {
  if (!(duration > 0.0)) throw Error(ErrorCode::kEmptyTrajectory, "duration must be positive");
  return straight_trajectory(start_x, start_y, deg2rad(heading_deg), speed, 0.0, duration);
}

Scene SimConfig::load_scene() const {
  const auto names = bundled_scene_names();
  if (std::find(names.begin(), names.end(), scene) != names.end()) return bundled_scene(scene);
  return read_scene(std::filesystem::path(scene));
}

void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value) {
  for (const Entry& e : entries()) {
    if (e.key == key) {
      e.set(cfg, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
}

void apply_config(AppConfig& cfg, std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError(name, lineno, "expected 'key = value'");
    try {
      set_config_value(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(name, lineno, e.what());
    }
  }
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kDatasetNotFound, "cannot open config " + path.string());
  apply_config(cfg, in, path.string());
}

void write_config(std::ostream& out, const AppConfig& cfg) {
  for (const Entry& e : entries()) out << e.key << " = " << e.get(cfg) << '\n';
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : entries()) keys.push_back(e.key);
  return keys;
}

}  // namespace lidarnav

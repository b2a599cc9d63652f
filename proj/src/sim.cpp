// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "lidarnav/cloud_io.hpp"
#include "lidarnav/error.hpp"
#include "lidarnav/nmea.hpp"

namespace lidarnav {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kScanStream = 1;
constexpr std::uint64_t kGpsStream = 2;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_number(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

// Slab test in the box frame; returns the entry distance, or infinity.
double ray_box(const Eigen::Vector3d& origin_local, const Eigen::Vector3d& dir_local,
               const Eigen::Vector3d& half) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double o = origin_local[k];
    const double d = dir_local[k];
    if (std::abs(d) < 1e-15) {
      if (o < -half[k] || o > half[k]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double a = (-half[k] - o) / d;
    double b = (half[k] - o) / d;
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  // A sensor inside a box sees nothing of it.
  if (t0 <= 0.0) return std::numeric_limits<double>::infinity();
  return t0;
}

PrimitiveKind parse_kind(std::string_view tok, bool& ok) {
  ok = true;
  if (tok == "WALL") return PrimitiveKind::kWall;
  if (tok == "PILLAR") return PrimitiveKind::kPillar;
  if (tok == "DECK") return PrimitiveKind::kDeck;
  if (tok == "GIRDER") return PrimitiveKind::kGirder;
  ok = false;
  return PrimitiveKind::kWall;
}

Primitive box(PrimitiveKind kind, double x, double y, double z, double yaw_deg, double lx,
              double ly, double lz, double reflectivity) {
  Primitive p;
  p.kind = kind;
  p.center = {x, y, z};
  p.yaw = deg2rad(yaw_deg);
  p.size = {lx, ly, lz};
  p.reflectivity = reflectivity;
  return p;
}

// Quay walls along x on both banks. Buttresses follow a golden-ratio
// sequence of spacings in [0.75, 1.25] * spacing so no stretch of wall
// repeats, which would make along-canal matching ambiguous.
void add_canal(Scene& s, double x0, double x1, double half_width, double top, double spacing) {
  const double len = x1 - x0;
  const double cx = 0.5 * (x0 + x1);
  const double zc = 0.5 * (top - 1.0);
  const double lz = top + 1.0;
  s.primitives.push_back(box(PrimitiveKind::kWall, cx, half_width + 0.5, zc, 0, len, 1.0, lz, 0.45));
  s.primitives.push_back(box(PrimitiveKind::kWall, cx, -half_width - 0.5, zc, 0, len, 1.0, lz, 0.45));
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int side = 0; side < 2; ++side) {
    const double y = side == 0 ? half_width - 0.3 : -half_width + 0.3;
    double x = x0 + spacing * (0.3 + 0.4 * side);
    for (int k = 1; x < x1; ++k) {
      const double depth = 0.4 + 0.4 * std::fmod((k + 7 * side) * golden * golden, 1.0);
      s.primitives.push_back(box(PrimitiveKind::kPillar, x, side == 0 ? y - 0.5 * depth + 0.3
                                                                      : y + 0.5 * depth - 0.3,
                                 0.5 * top, 0, 0.8, depth, top, 0.6));
      x += spacing * (0.75 + 0.5 * std::fmod((k + 3 * side) * golden, 1.0));
    }
  }
}

}  // namespace

std::string_view primitive_kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kWall: return "WALL";
    case PrimitiveKind::kPillar: return "PILLAR";
    case PrimitiveKind::kDeck: return "DECK";
    case PrimitiveKind::kGirder: return "GIRDER";
  }
  return "?";
}

void Scene::validate() const {
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    if (!(p.size.minCoeff() > 0.0) || !p.center.allFinite() || !std::isfinite(p.yaw)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "primitive " + std::to_string(i) + " has non-positive or non-finite dimensions");
    }
    if (!(p.reflectivity >= 0.0 && p.reflectivity <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "primitive " + std::to_string(i) + " reflectivity outside [0, 1]");
    }
    if (p.kind != PrimitiveKind::kWall && p.bottom() < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "primitive " + std::to_string(i) + " extends below the water plane");
    }
  }
}

Scene read_scene(std::istream& in, const std::string& name) {
  Scene scene;
  scene.name = name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto toks = split_ws(body);
    bool ok = false;
    const PrimitiveKind kind = parse_kind(toks[0], ok);
    if (!ok) throw FormatError(name, lineno, "unknown primitive '" + std::string(toks[0]) + "'");
    if (toks.size() != 9) throw FormatError(name, lineno, "expected 8 numbers after the kind");
    double v[8];
    for (int k = 0; k < 8; ++k) {
      if (!parse_number(toks[k + 1], v[k])) throw FormatError(name, lineno, "bad number");
    }
    scene.primitives.push_back(box(kind, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]));
    try {
      Scene one{name, {scene.primitives.back()}};
      one.validate();
    } catch (const Error& e) {
      throw FormatError(name, lineno, e.what());
    }
  }
  return scene;
}

Scene read_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kDatasetNotFound, "cannot open scene " + path.string());
  Scene s = read_scene(in, path.string());
  s.name = path.stem().string();
  return s;
}

void write_scene(std::ostream& out, const Scene& scene) {
  for (const Primitive& p : scene.primitives) {
    out << primitive_kind_name(p.kind);
    for (double v : {p.center.x(), p.center.y(), p.center.z(), rad2deg(p.yaw), p.size.x(),
                     p.size.y(), p.size.z(), p.reflectivity}) {
      out << ' ' << format_double(v, 12);
    }
    out << '\n';
  }
}

std::vector<std::string> bundled_scene_names() {
  return {"open_water", "canal_walls", "bridge_crossing", "lock"};
}

Scene bundled_scene(std::string_view name) {
  Scene s;
  s.name = std::string(name);
  if (name == "open_water") {
    return s;
  }
  if (name == "canal_walls") {
    add_canal(s, -100.0, 400.0, 9.0, 3.0, 8.0);
    return s;
  }
  if (name == "bridge_crossing") {
    add_canal(s, -100.0, 400.0, 9.0, 3.0, 8.0);
    // Deck 30 m long spanning both banks, with two pillar rows and girders.
    s.primitives.push_back(box(PrimitiveKind::kDeck, 150.0, 0.0, 5.5, 0, 30.0, 22.0, 1.0, 0.5));
    for (double x = 138.0; x <= 162.0; x += 6.0) {
      s.primitives.push_back(box(PrimitiveKind::kPillar, x, 5.0, 2.5, 0, 1.2, 1.2, 5.0, 0.7));
      s.primitives.push_back(box(PrimitiveKind::kPillar, x, -5.0, 2.5, 0, 1.2, 1.2, 5.0, 0.7));
    }
    for (double x = 136.0; x <= 164.0; x += 4.0) {
      s.primitives.push_back(box(PrimitiveKind::kGirder, x, 0.0, 4.75, 0, 0.4, 22.0, 0.5, 0.8));
    }
    return s;
  }
  if (name == "lock") {
    add_canal(s, -100.0, 100.0, 9.0, 3.0, 8.0);
    add_canal(s, 180.0, 400.0, 9.0, 3.0, 8.0);
    // Chamber: narrower and taller walls, closed off towards the banks.
    add_canal(s, 100.0, 180.0, 7.5, 3.5, 6.0);
    for (double x : {100.0, 180.0}) {
      s.primitives.push_back(box(PrimitiveKind::kWall, x, 9.0, 1.5, 0, 1.0, 3.0, 5.0, 0.45));
      s.primitives.push_back(box(PrimitiveKind::kWall, x, -9.0, 1.5, 0, 1.0, 3.0, 5.0, 0.45));
    }
    // Open gate leaves folded against the chamber walls.
    for (double x : {104.0, 176.0}) {
      s.primitives.push_back(box(PrimitiveKind::kPillar, x, 6.6, 2.0, 0, 6.0, 0.4, 4.0, 0.8));
      s.primitives.push_back(box(PrimitiveKind::kPillar, x, -6.6, 2.0, 0, 6.0, 0.4, 4.0, 0.8));
    }
    return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scene '" + std::string(name) + "'");
}

LidarModel LidarModel::hdl32() {
  LidarModel m;
  m.beam_elevations.resize(32);
  for (int i = 0; i < 32; ++i) {
    m.beam_elevations[i] = deg2rad(10.67 - i * (41.34 / 31.0));
  }
  m.azimuth_step = deg2rad(0.2);
  return m;
}

std::size_t LidarModel::azimuth_count() const {
  return static_cast<std::size_t>(std::llround(kTwoPi / azimuth_step));
}

void LidarModel::validate() const {
  if (beam_elevations.empty()) throw Error(ErrorCode::kInvalidArgument, "no beams");
  if (!(azimuth_step > 0.0) || azimuth_step > kTwoPi) {
    throw Error(ErrorCode::kInvalidArgument, "azimuth step must lie in (0, 2pi]");
  }
  if (std::abs(azimuth_count() * azimuth_step - kTwoPi) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "azimuth step must divide 2pi");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout probability must lie in [0, 1)");
  }
  if (!(max_range > min_range && min_range >= 0.0 && range_noise_sigma >= 0.0 &&
        mount_height > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid range, noise or mount height");
  }
}

PointCloud raycast_scan(const Scene& scene, const LocalPose& pose, const LidarModel& model,
                        std::uint64_t seed) {
  model.validate();
  const Eigen::Vector3d origin(pose.x, pose.y, model.mount_height);

  // Per-primitive frame data and horizontal angular extent seen from the sensor.
  struct Candidate {
    Eigen::Vector3d origin_local;
    Eigen::Vector3d half;
    double cos_yaw, sin_yaw;  // world -> box rotation
    double az_center, az_half;  // in the sensor frame; az_half >= pi means all
    double reflectivity;
  };
  std::vector<Candidate> cands;
  for (const Primitive& p : scene.primitives) {
    const Eigen::Vector3d d = origin - p.center;
    const double radius = 0.5 * std::hypot(p.size.x(), p.size.y());
    const double horiz = std::hypot(d.x(), d.y());
    if (horiz - radius > model.max_range) continue;
    Candidate c;
    c.cos_yaw = std::cos(p.yaw);
    c.sin_yaw = std::sin(p.yaw);
    c.origin_local = {c.cos_yaw * d.x() + c.sin_yaw * d.y(), -c.sin_yaw * d.x() + c.cos_yaw * d.y(),
                      d.z()};
    c.half = 0.5 * p.size;
    c.az_center = wrap_angle(std::atan2(-d.y(), -d.x()) - pose.yaw);
    c.az_half = horiz > radius ? std::asin(radius / horiz) + 1e-6 : std::numbers::pi;
    c.reflectivity = p.reflectivity;
    cands.push_back(c);
  }

  const std::size_t n_az = model.azimuth_count();
  std::vector<double> cos_el(model.beam_elevations.size()), sin_el(cos_el.size());
  for (std::size_t b = 0; b < cos_el.size(); ++b) {
    cos_el[b] = std::cos(model.beam_elevations[b]);
    sin_el[b] = std::sin(model.beam_elevations[b]);
  }

  Rng rng(seed);
  PointCloud cloud;
  cloud.stamp = pose.t;
  std::vector<const Candidate*> active;
  for (std::size_t a = 0; a < n_az; ++a) {
    const double az = static_cast<double>(a) * model.azimuth_step;
    active.clear();
    for (const Candidate& c : cands) {
      if (c.az_half >= std::numbers::pi || std::abs(wrap_angle(az - c.az_center)) <= c.az_half) {
        active.push_back(&c);
      }
    }
    const double ca = std::cos(az), sa = std::sin(az);
    const double wa = az + pose.yaw;
    const double cw = std::cos(wa), sw = std::sin(wa);
    for (std::size_t b = 0; b < cos_el.size(); ++b) {
      const double dropout_draw = uniform01(rng);
      const double noise_draw = gaussian(rng);
      if (active.empty()) continue;
      const Eigen::Vector3d dir(cos_el[b] * cw, cos_el[b] * sw, sin_el[b]);
      double limit = model.max_range;
      if (dir.z() < 0.0) limit = std::min(limit, model.mount_height / -dir.z());
      double best = std::numeric_limits<double>::infinity();
      double refl = 0.0;
      for (const Candidate* c : active) {
        const Eigen::Vector3d dl(c->cos_yaw * dir.x() + c->sin_yaw * dir.y(),
                                 -c->sin_yaw * dir.x() + c->cos_yaw * dir.y(), dir.z());
        const double t = ray_box(c->origin_local, dl, c->half);
        if (t < best) {
          best = t;
          refl = c->reflectivity;
        }
      }
      if (!(best < limit) || best < model.min_range) continue;
      if (dropout_draw < model.dropout_prob) continue;
      const double r = best + model.range_noise_sigma * noise_draw;
      if (r <= 0.0) continue;
      Point3 p;
      p.x = r * cos_el[b] * ca;
      p.y = r * cos_el[b] * sa;
      p.z = r * sin_el[b];
      p.intensity = refl;
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

void GpsCorruptionModel::validate() const {
  auto check_sorted = [](auto windows, const char* what) {
    std::sort(windows.begin(), windows.end(),
              [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
    for (std::size_t i = 0; i < windows.size(); ++i) {
      if (!(windows[i].t_end >= windows[i].t_start)) {
        throw Error(ErrorCode::kInvalidArgument, std::string(what) + " window ends before it starts");
      }
      if (i > 0 && windows[i].t_start <= windows[i - 1].t_end) {
        throw Error(ErrorCode::kInvalidArgument, std::string(what) + " windows overlap");
      }
    }
  };
  check_sorted(blackouts, "blackout");
  check_sorted(multipath, "multipath");
  for (const auto& w : multipath) {
    if (!(w.amplitude >= 0.0) || !(w.period > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "multipath amplitude must be >= 0, period > 0");
    }
  }
  if (!(base_noise_sigma >= 0.0) || !(base_hdop >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise sigma and HDOP must be non-negative");
  }
}

bool GpsCorruptionModel::in_blackout(double t) const {
  return std::any_of(blackouts.begin(), blackouts.end(),
                     [t](const BlackoutWindow& w) { return t >= w.t_start && t <= w.t_end; });
}

const MultipathWindow* GpsCorruptionModel::multipath_at(double t) const {
  for (const auto& w : multipath) {
    if (t >= w.t_start && t <= w.t_end) return &w;
  }
  return nullptr;
}

std::optional<std::string> corrupt_gps(const LocalPose& truth, double t,
                                       const GpsCorruptionModel& model, Rng& rng) {
  const double nx = gaussian(rng);
  const double ny = gaussian(rng);
  if (model.in_blackout(t)) return std::nullopt;
  Eigen::Vector2d offset(model.base_noise_sigma * nx, model.base_noise_sigma * ny);
  if (const MultipathWindow* w = model.multipath_at(t)) {
    const double phase = kTwoPi * (t - w->t_start) / w->period;
    offset = w->amplitude * Eigen::Vector2d(std::cos(phase), std::sin(phase));
  }
  const GeoReference geo = local_to_geodetic(truth.xy() + offset, model.reference);
  GpsFix fix;
  fix.time_of_day = std::fmod(std::max(t, 0.0), 86400.0);
  fix.latitude = geo.latitude;
  fix.longitude = geo.longitude;
  fix.fix_quality = 1;
  fix.satellites = model.satellites;
  fix.hdop = model.base_hdop;
  fix.altitude = 0.0;
  return format_nmea_gga(fix);
}

LocalPose interpolate_pose(const std::vector<LocalPose>& trajectory, double t) {
  if (trajectory.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  if (t <= trajectory.front().t) {
    LocalPose p = trajectory.front();
    p.t = t;
    return p;
  }
  if (t >= trajectory.back().t) {
    LocalPose p = trajectory.back();
    p.t = t;
    return p;
  }
  const auto it = std::upper_bound(trajectory.begin(), trajectory.end(), t,
                                   [](double v, const LocalPose& p) { return v < p.t; });
  const LocalPose& b = *it;
  const LocalPose& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  LocalPose p = a;
  p.t = t;
  p.x = a.x + u * (b.x - a.x);
  p.y = a.y + u * (b.y - a.y);
  p.yaw = wrap_angle(a.yaw + u * wrap_angle(b.yaw - a.yaw));
  return p;
}

std::vector<LocalPose> straight_trajectory(double x0, double y0, double yaw, double speed,
                                           double t0, double t1) {
  LocalPose a;
  a.t = t0;
  a.x = x0;
  a.y = y0;
  a.yaw = yaw;
  LocalPose b = a;
  b.t = t1;
  b.x = x0 + speed * (t1 - t0) * std::cos(yaw);
  b.y = y0 + speed * (t1 - t0) * std::sin(yaw);
  return {a, b};
}

SimRun::SimRun(Scene scene, std::vector<LocalPose> trajectory, LidarModel lidar,
               GpsCorruptionModel gps, std::uint64_t seed, SimOptions options)
    : scene_(std::move(scene)), lidar_(std::move(lidar)), seed_(seed), reference_(gps.reference) {
  if (trajectory.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (!(trajectory[i].t > trajectory[i - 1].t)) {
      throw Error(ErrorCode::kInvalidArgument, "trajectory must be strictly time-ordered");
    }
  }
  if (!(options.scan_period > 0.0) || !(options.gps_period > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "periods must be positive");
  }
  scene_.validate();
  lidar_.validate();
  gps.validate();

  const double t0 = trajectory.front().t;
  const double t1 = trajectory.back().t;
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * options.scan_period;
    if (t >= t1 - 1e-9) break;
    stamps_.push_back(t);
    truth_.push_back(interpolate_pose(trajectory, t));
    truth_.back().source = PoseSource::kGps;
  }
  if (stamps_.empty()) throw Error(ErrorCode::kEmptyTrajectory, "trajectory shorter than a scan");

  Rng rng(derive_seed(seed, kGpsStream));
  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * options.gps_period;
    if (t >= t1 - 1e-9) break;
    if (auto s = corrupt_gps(interpolate_pose(trajectory, t), t, gps, rng)) {
      gps_log_.push_back({t, std::move(*s)});
    }
  }
}

PointCloud SimRun::scan(std::size_t i) const {
  const std::uint64_t s = derive_seed(derive_seed(seed_, kScanStream), i);
  return raycast_scan(scene_, truth_.at(i), lidar_, s);
}

SimDataset SimRun::materialize() const {
  SimDataset d;
  d.scans.reserve(scan_count());
  for (std::size_t i = 0; i < scan_count(); ++i) d.scans.push_back(scan(i));
  d.gps_log = gps_log_;
  d.truth = truth_;
  d.seed = seed_;
  d.reference = reference_;
  return d;
}

SimDataset simulate_run(const Scene& scene, const std::vector<LocalPose>& trajectory,
                        const LidarModel& lidar, const GpsCorruptionModel& gps,
                        std::uint64_t seed, const SimOptions& options) {
  return SimRun(scene, trajectory, lidar, gps, seed, options).materialize();
}

namespace {

std::string scan_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scans/%06zu.cloud", i);
  return buf;
}

void write_common(const std::filesystem::path& dir, const std::vector<double>& stamps,
                  const std::vector<GpsEvent>& gps, const std::vector<LocalPose>& truth,
                  std::uint64_t seed, const GeoReference& reference) {
  std::ofstream manifest(dir / "manifest.csv");
  manifest << "t,scan_file\n";
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    manifest << fixed(stamps[i], 6) << ',' << scan_name(i) << '\n';
  }
  std::ofstream log(dir / "gps.log");
  for (const GpsEvent& e : gps) log << fixed(e.t, 6) << ' ' << e.sentence << '\n';
  std::ofstream tr(dir / "truth.csv");
  tr << "t,x,y,yaw\n";
  for (const LocalPose& p : truth) {
    tr << fixed(p.t, 6) << ',' << fixed(p.x, 9) << ',' << fixed(p.y, 9) << ','
       << fixed(p.yaw, 9) << '\n';
  }
  std::ofstream(dir / "seed.txt") << seed << '\n';
  std::ofstream(dir / "reference.txt")
      << fixed(reference.latitude, 9) << ' ' << fixed(reference.longitude, 9) << '\n';
  if (!manifest || !log || !tr) {
    throw Error(ErrorCode::kInvalidArgument, "cannot write dataset to " + dir.string());
  }
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SimRun& run) {
  std::filesystem::create_directories(dir / "scans");
  for (std::size_t i = 0; i < run.scan_count(); ++i) write_cloud(dir / scan_name(i), run.scan(i));
  write_common(dir, run.stamps(), run.gps_log(), run.truth(), run.seed(), run.reference());
}

void write_dataset(const std::filesystem::path& dir, const SimDataset& data) {
  std::filesystem::create_directories(dir / "scans");
  std::vector<double> stamps;
  for (std::size_t i = 0; i < data.scans.size(); ++i) {
    write_cloud(dir / scan_name(i), data.scans[i]);
    stamps.push_back(data.scans[i].stamp);
  }
  write_common(dir, stamps, data.gps_log, data.truth, data.seed, data.reference);
}

DatasetReader::DatasetReader(const std::filesystem::path& dir) : dir_(dir) {
  const auto manifest_path = dir / "manifest.csv";
  std::ifstream manifest(manifest_path);
  if (!std::filesystem::is_directory(dir) || !manifest) {
    throw Error(ErrorCode::kDatasetNotFound, "no dataset at " + dir.string());
  }
  const std::string mname = manifest_path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(manifest, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (lineno == 1 && body == "t,scan_file") continue;
    const auto f = split(body, ',');
    double t = 0.0;
    if (f.size() != 2 || !parse_number(trim(f[0]), t) || trim(f[1]).empty()) {
      throw FormatError(mname, lineno, "expected 't,scan_file'");
    }
    if (!stamps_.empty() && !(t > stamps_.back())) {
      throw FormatError(mname, lineno, "scan stamps must increase strictly");
    }
    stamps_.push_back(t);
    files_.push_back(dir / trim(f[1]));
  }

  const auto gps_path = dir / "gps.log";
  if (std::ifstream log(gps_path); log) {
    const std::string gname = gps_path.string();
    lineno = 0;
    while (std::getline(log, line)) {
      ++lineno;
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto sp = body.find_first_of(" \t");
      double t = 0.0;
      if (sp == std::string::npos || !parse_number(std::string_view(body).substr(0, sp), t)) {
        throw FormatError(gname, lineno, "expected '<epoch_seconds> <sentence>'");
      }
      GpsEvent e{t, trim(std::string_view(body).substr(sp))};
      try {
        (void)parse_nmea_gga(e.sentence);
      } catch (const Error& err) {
        throw FormatError(gname, lineno, err.what());
      }
      if (!gps_log_.empty() && !(t > gps_log_.back().t)) {
        throw FormatError(gname, lineno, "GPS stamps must increase strictly");
      }
      gps_log_.push_back(std::move(e));
      gps_lines_.push_back(lineno);
    }
  }

  const auto truth_path = dir / "truth.csv";
  if (std::ifstream tr(truth_path); tr) {
    const std::string tname = truth_path.string();
    lineno = 0;
    while (std::getline(tr, line)) {
      ++lineno;
      const std::string body = trim(line);
      if (body.empty()) continue;
      if (lineno == 1 && body == "t,x,y,yaw") continue;
      const auto f = split(body, ',');
      double v[4];
      bool ok = f.size() == 4;
      for (std::size_t k = 0; ok && k < 4; ++k) ok = parse_number(trim(f[k]), v[k]);
      if (!ok) throw FormatError(tname, lineno, "expected 't,x,y,yaw'");
      LocalPose p;
      p.t = v[0];
      p.x = v[1];
      p.y = v[2];
      p.yaw = v[3];
      truth_.push_back(p);
    }
  }

  if (std::ifstream sf(dir / "seed.txt"); sf) {
    std::string s;
    sf >> s;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), seed_);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw FormatError((dir / "seed.txt").string(), 1, "expected an unsigned integer");
    }
  }

  if (std::ifstream rf(dir / "reference.txt"); rf) {
    std::string lat, lon;
    GeoReference ref;
    rf >> lat >> lon;
    if (!parse_number(lat, ref.latitude) || !parse_number(lon, ref.longitude) ||
        std::fabs(ref.latitude) > 90.0 || std::fabs(ref.longitude) > 180.0) {
      throw FormatError((dir / "reference.txt").string(), 1, "expected 'lat lon' in degrees");
    }
    reference_ = ref;
  }
}

PointCloud DatasetReader::scan(std::size_t i) const {
  if (!std::filesystem::exists(files_.at(i))) {
    throw Error(ErrorCode::kDatasetNotFound, "missing scan " + files_[i].string());
  }
  PointCloud c = read_cloud(files_[i]);
  c.stamp = stamps_[i];
  return c;
}

}  // namespace lidarnav

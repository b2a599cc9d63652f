// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include "lidarnav/error.hpp"
#include "lidarnav/nmea.hpp"
#include "lidarnav/random.hpp"

namespace lidarnav {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Events closer than this are treated as simultaneous.
constexpr double kSameTime = 1e-6;

struct MatchOutcome {
  PlanarMotion motion;  // vehicle motion source -> target
  double score = 0.0;
  double rejected_fraction = 0.0;
  StageTimes times;
};

MatchOutcome match_pair(const PointCloud& source, const PointCloud& target, Method method,
                        const PipelineConfig& cfg, std::uint64_t seed) {
  MatchOutcome out;
  const auto start = Clock::now();
  if (method == Method::kFull6d) {
    RegistrationConfig reg = cfg.registration;
    reg.seed = seed;
    RegistrationTiming tm;
    const RegistrationResult r = register_scans(source, target, cfg.preprocess, reg, &tm);
    out.motion = vehicle_motion_from_registration(r.motion.transform, 1.0);
    out.score = r.motion.fitness;
    out.motion.score = out.score;
    out.rejected_fraction = r.rejected_fraction;
    out.times.preprocess = tm.preprocess;
    out.times.features = tm.features;
    out.times.prealign = tm.prealign;
    out.times.icp = tm.icp;
  } else {
    PlanarTiming tm;
    const PlanarMotion m = match_planar(source, target, cfg.planar, cfg.preprocess, &tm);
    out.motion = vehicle_motion_from_registration(m.to_transform(), m.score);
    out.score = m.score;
    out.times.project = tm.project;
    out.times.rotate_correlate = tm.rotate_correlate;
  }
  out.times.total = seconds_since(start);
  return out;
}

void add_times(StageTimes& acc, const StageTimes& t) {
  acc.preprocess += t.preprocess;
  acc.features += t.features;
  acc.prealign += t.prealign;
  acc.icp += t.icp;
  acc.project += t.project;
  acc.rotate_correlate += t.rotate_correlate;
  acc.total += t.total;
}

double translation_norm(const PlanarMotion& m) { return std::hypot(m.dx, m.dy); }

PlanarMotion scaled(const PlanarMotion& m, double k) {
  PlanarMotion out = m;
  out.dx *= k;
  out.dy *= k;
  out.yaw = wrap_angle(m.yaw * k);
  return out;
}

StageSummary summarize(const std::string& stage, std::vector<double> v) {
  StageSummary s;
  s.stage = stage;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const auto pct = [&](double q) {
    const std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(k, v.size() - 1)];
  };
  s.p50 = pct(0.5);
  s.p95 = pct(0.95);
  s.min = v.front();
  return s;
}

std::vector<StageSummary> summarize_pairs(const std::vector<StageTimes>& times, Method method) {
  std::vector<StageSummary> out;
  const auto column = [&](double StageTimes::*field) {
    std::vector<double> v;
    for (const auto& t : times) v.push_back(t.*field);
    return v;
  };
  if (method == Method::kFull6d) {
    out.push_back(summarize("preprocess", column(&StageTimes::preprocess)));
    out.push_back(summarize("features", column(&StageTimes::features)));
    out.push_back(summarize("prealign", column(&StageTimes::prealign)));
    out.push_back(summarize("icp", column(&StageTimes::icp)));
  } else {
    out.push_back(summarize("project", column(&StageTimes::project)));
    out.push_back(summarize("rotate_correlate", column(&StageTimes::rotate_correlate)));
  }
  out.push_back(summarize("total", column(&StageTimes::total)));
  return out;
}

}  // namespace

std::string_view pair_status_name(PairStatus s) {
  switch (s) {
    case PairStatus::kMatched: return "matched";
    case PairStatus::kBridged: return "bridged";
    case PairStatus::kFrozen: return "frozen";
  }
  return "?";
}

PlanarMotion compose_motion(const PlanarMotion& a, const PlanarMotion& b) {
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  PlanarMotion out;
  out.dx = a.dx + c * b.dx - s * b.dy;
  out.dy = a.dy + s * b.dx + c * b.dy;
  out.yaw = wrap_angle(a.yaw + b.yaw);
  out.score = b.score;
  return out;
}

PlanarMotion invert_motion(const PlanarMotion& m) {
  const double c = std::cos(m.yaw), s = std::sin(m.yaw);
  PlanarMotion out;
  out.dx = -(c * m.dx + s * m.dy);
  out.dy = -(-s * m.dx + c * m.dy);
  out.yaw = wrap_angle(-m.yaw);
  out.score = m.score;
  return out;
}

ScanSequence make_sequence(const DatasetReader& reader) {
  ScanSequence seq;
  seq.stamps = reader.stamps();
  seq.load = [&reader](std::size_t i) { return reader.scan(i); };
  seq.gps = reader.gps_log();
  seq.gps_source = (reader.dir() / "gps.log").string();
  for (std::size_t i = 0; i < seq.gps.size(); ++i) seq.gps_lines.push_back(reader.gps_line(i));
  seq.truth = reader.truth();
  seq.seed = reader.seed();
  seq.reference = reader.reference();
  return seq;
}

ScanSequence make_sequence(const SimRun& run) {
  ScanSequence seq;
  seq.stamps = run.stamps();
  seq.load = [&run](std::size_t i) { return run.scan(i); };
  seq.gps = run.gps_log();
  seq.truth = run.truth();
  seq.seed = run.seed();
  seq.reference = run.reference();
  return seq;
}

ScanSequence make_sequence(const SimDataset& data) {
  ScanSequence seq;
  for (const auto& s : data.scans) seq.stamps.push_back(s.stamp);
  seq.load = [&data](std::size_t i) { return data.scans.at(i); };
  seq.gps = data.gps_log;
  seq.truth = data.truth;
  seq.seed = data.seed;
  seq.reference = data.reference;
  return seq;
}

RunReport run_pipeline(const ScanSequence& seq, const PipelineConfig& cfg) {
  cfg.validate();
  if (seq.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two scans");
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (!(seq.stamps[i] > seq.stamps[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "scan stamps must increase strictly");
    }
  }

  RunReport report;
  report.method = cfg.method;
  report.truth = seq.truth;

  // GPS: parse everything up front so malformed input fails before work.
  std::vector<GpsFix> fixes;
  for (std::size_t i = 0; i < seq.gps.size(); ++i) {
    try {
      fixes.push_back(parse_nmea_gga(seq.gps[i].sentence));
    } catch (const Error& e) {
      const std::size_t line = i < seq.gps_lines.size() ? seq.gps_lines[i] : i + 1;
      throw FormatError(seq.gps_source, static_cast<int>(line), e.what());
    }
  }
  if (cfg.reference) {
    report.reference = *cfg.reference;
  } else if (seq.reference) {
    report.reference = *seq.reference;
  } else {
    const auto first = std::find_if(fixes.begin(), fixes.end(),
                                    [](const GpsFix& f) { return f.fix_quality != 0; });
    if (first != fixes.end()) report.reference = {first->latitude, first->longitude};
  }

  // Odometry: keyframe matching with failure bridging.
  const std::uint64_t seed = cfg.seed;
  std::vector<StageTimes> pair_times;
  std::vector<PlanarMotion> pair_motion;
  PointCloud current = seq.load(0);
  std::size_t key = 0;
  PointCloud key_cloud = current;
  PlanarMotion key_to_current;  // vehicle motion key -> current scan
  std::optional<PlanarMotion> last_good;
  double last_good_dt = 0.0;
  PlanarMotion last_motion;
  bool previous_failed = false;

  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    PointCloud target = seq.load(i + 1);
    PairRecord rec;
    rec.index = i;
    rec.t = seq.stamps[i + 1];
    rec.points_source = current.size();
    rec.points_target = target.size();
    const double dt = seq.stamps[i + 1] - seq.stamps[i];
    const std::uint64_t pair_seed = derive_seed(seed, i);
    bool matched = false;

    if (key != i && cfg.keyframe_distance > 0.0) {
      const PlanarMotion predicted = compose_motion(key_to_current, last_motion);
      if (translation_norm(predicted) <= cfg.keyframe_distance) {
        try {
          const MatchOutcome m = match_pair(key_cloud, target, cfg.method, cfg, pair_seed);
          add_times(rec.times, m.times);
          const double disagreement = std::hypot(m.motion.dx - predicted.dx,
                                                 m.motion.dy - predicted.dy);
          if (disagreement <= cfg.keyframe_gate &&
              translation_norm(m.motion) <= cfg.keyframe_distance) {
            rec.motion = compose_motion(invert_motion(key_to_current), m.motion);
            rec.score = m.score;
            rec.rejected_fraction = m.rejected_fraction;
            rec.keyframe = key;
            key_to_current = m.motion;
            matched = true;
          }
        } catch (const Error&) {
          // Fall back to the consecutive pair below.
        }
      }
    }
    if (!matched) {
      try {
        const MatchOutcome m = match_pair(current, target, cfg.method, cfg, pair_seed);
        add_times(rec.times, m.times);
        rec.motion = m.motion;
        rec.score = m.score;
        rec.rejected_fraction = m.rejected_fraction;
        rec.keyframe = i;
        key = i;
        key_cloud = current;
        key_to_current = m.motion;
        matched = true;
      } catch (const Error& e) {
        rec.failure = std::string(error_code_name(e.code()));
      }
    }

    if (matched) {
      rec.status = PairStatus::kMatched;
      last_good = rec.motion;
      last_good_dt = dt;
      previous_failed = false;
    } else {
      // One pair of constant-velocity extrapolation, then hold still.
      if (!previous_failed && last_good && last_good_dt > 0.0) {
        rec.status = PairStatus::kBridged;
        rec.motion = scaled(*last_good, dt / last_good_dt);
      } else {
        rec.status = PairStatus::kFrozen;
        rec.motion = PlanarMotion{};
      }
      rec.motion.score = 0.0;
      rec.keyframe = key;
      key_to_current = compose_motion(key_to_current, rec.motion);
      previous_failed = true;
    }
    last_motion = rec.motion;
    pair_motion.push_back(rec.motion);
    pair_times.push_back(rec.times);
    report.per_pair.push_back(std::move(rec));
    current = std::move(target);
    if (key == i + 1) key_cloud = current;
  }

  // Pure odometry track.
  LocalPose pose;
  pose.t = seq.stamps[0];
  pose.yaw = cfg.initial_yaw;
  pose.source = PoseSource::kLidar;
  report.odometry.push_back(pose);
  for (std::size_t i = 0; i < pair_motion.size(); ++i) {
    pose = integrate_odometry(pose, pair_motion[i]);
    pose.t = seq.stamps[i + 1];
    report.odometry.push_back(pose);
  }

  // Fusion over the merged, time-ordered event stream.
  FusedState state;
  state.dead_reckoned.yaw = cfg.initial_yaw;
  state.dead_reckoned.t = seq.stamps[0];
  std::size_t next_scan = 1;  // odometry for pair k arrives with scan k + 1
  std::size_t next_gps = 0;
  const double inf = std::numeric_limits<double>::infinity();
  while (next_scan < seq.size() || next_gps < fixes.size()) {
    const double ts = next_scan < seq.size() ? seq.stamps[next_scan] : inf;
    const double tg = next_gps < fixes.size() ? seq.gps[next_gps].t : inf;
    const double t = std::min(ts, tg);
    std::optional<GpsFix> gps;
    std::optional<PlanarMotion> odom;
    if (tg <= t + kSameTime) {
      gps = fixes[next_gps];
      LocalPose fix_pose;
      fix_pose.t = seq.gps[next_gps].t;
      const Eigen::Vector2d xy = geodetic_to_local(*gps, report.reference);
      fix_pose.x = xy.x();
      fix_pose.y = xy.y();
      fix_pose.source = PoseSource::kGps;
      report.gps_track.push_back(fix_pose);
      ++next_gps;
    }
    if (ts <= t + kSameTime) {
      odom = pair_motion[next_scan - 1];
      ++next_scan;
    }
    state = fuse_step(state, t, gps, odom, cfg.fusion, report.reference);
    if (gps) report.gps_trust.push_back(state.gps_trust);
    report.trajectory.push_back(state.pose);
    report.dead_reckoning_only.push_back(state.dead_reckoning_only);
  }

  report.timing = summarize_pairs(pair_times, cfg.method);
  if (!seq.truth.empty()) {
    report.has_metrics = true;
    report.odometry_metrics = compute_metrics(report.odometry, seq.truth);
    report.fused_metrics = compute_metrics(report.trajectory, seq.truth);
    double failures = 0.0, total = 0.0;
    for (const auto& r : report.per_pair) {
      if (r.status != PairStatus::kMatched) failures += 1.0;
      total += r.times.total;
    }
    const double frac = failures / static_cast<double>(report.per_pair.size());
    const double hz = total > 0.0 ? static_cast<double>(report.per_pair.size()) / total : 0.0;
    for (Metrics* m : {&report.odometry_metrics, &report.fused_metrics}) {
      m->match_failure_fraction = frac;
      m->throughput_hz = hz;
    }
  }
  return report;
}

RunReport run_pipeline(const std::filesystem::path& dataset, const PipelineConfig& cfg) {
  const DatasetReader reader(dataset);
  return run_pipeline(make_sequence(reader), cfg);
}

std::vector<std::size_t> bench_bucket_edges() {
  return {0, 6000, 10000, 14000, 18000, 22000, 27000, std::numeric_limits<std::size_t>::max()};
}

BenchReport benchmark(const ScanSequence& seq, Method method, const PipelineConfig& cfg,
                      std::size_t repetitions) {
  cfg.validate();
  if (repetitions == 0) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  if (seq.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two scans");
  std::vector<PointCloud> scans;
  scans.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) scans.push_back(seq.load(i));

  const auto edges = bench_bucket_edges();
  const auto bucket_of = [&](std::size_t n) {
    std::size_t b = 0;
    while (b + 2 < edges.size() && n >= edges[b + 1]) ++b;
    return b;
  };

  BenchReport rep;
  rep.method = method;
  rep.repetitions = repetitions;
  for (std::size_t i = 0; i + 1 < scans.size(); ++i) {
    BenchPair p;
    p.index = i;
    p.points = scans[i].size();
    p.bucket = bucket_of(p.points);
    p.min_total = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < repetitions; ++r) {
      StageTimes t;
      const auto start = Clock::now();
      try {
        t = match_pair(scans[i], scans[i + 1], method, cfg, derive_seed(cfg.seed, i)).times;
      } catch (const Error& e) {
        p.failure = std::string(error_code_name(e.code()));
        t.total = seconds_since(start);
      }
      add_times(p.mean, t);
      p.min_total = std::min(p.min_total, t.total);
    }
    const double k = 1.0 / static_cast<double>(repetitions);
    for (double* f : {&p.mean.preprocess, &p.mean.features, &p.mean.prealign, &p.mean.icp,
                      &p.mean.project, &p.mean.rotate_correlate, &p.mean.total}) {
      *f *= k;
    }
    rep.pairs.push_back(std::move(p));
  }

  double total = 0.0;
  for (const auto& p : rep.pairs) total += p.mean.total;
  rep.end_to_end_hz = total > 0.0 ? static_cast<double>(rep.pairs.size()) / total : 0.0;

  std::vector<double> order, times;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    BenchBucket bucket;
    bucket.lo = edges[b];
    bucket.hi = edges[b + 1];
    if (b == 0) {
      bucket.label = "<6k";
    } else if (b + 2 == edges.size()) {
      bucket.label = ">=27k";
    } else {
      bucket.label = std::to_string(edges[b] / 1000) + "k-" + std::to_string(edges[b + 1] / 1000) + "k";
    }
    double sum = 0.0;
    bucket.min_total = std::numeric_limits<double>::infinity();
    for (const auto& p : rep.pairs) {
      if (p.bucket != b) continue;
      ++bucket.pairs;
      sum += p.mean.total;
      bucket.min_total = std::min(bucket.min_total, p.min_total);
    }
    if (bucket.pairs == 0) continue;
    bucket.mean_total = sum / static_cast<double>(bucket.pairs);
    order.push_back(static_cast<double>(b));
    times.push_back(bucket.mean_total);
    rep.buckets.push_back(std::move(bucket));
  }
  rep.bucket_spearman = spearman(order, times);
  return rep;
}

}  // namespace lidarnav

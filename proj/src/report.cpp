// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

constexpr double kRadToDeg = 57.29577951308232;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // Avoid "-0.000000" so equal values print identically.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round numbers for axis ticks: 1, 2 or 5 times a power of ten.
double tick_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

void write_metrics_row(std::ostream& out, const char* track, const Metrics& m) {
  out << track << ',' << fixed(m.final_yaw_drift, 6) << ',' << fixed(m.travelled_distance_est, 6)
      << ',' << fixed(m.travelled_distance_truth, 6) << ',' << fixed(m.rpe_translation_rmse, 6)
      << ',' << fixed(m.rpe_yaw_rmse, 6) << ',' << fixed(m.ate_rmse, 6) << ','
      << fixed(m.match_failure_fraction, 6) << ',' << m.matched_poses << '\n';
}

std::vector<double> column_t(const std::vector<LocalPose>& poses) {
  std::vector<double> v;
  for (const auto& p : poses) v.push_back(p.t);
  return v;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<LocalPose>& poses) {
  out << "t,x,y,yaw,source\n";
  for (const auto& p : poses) {
    out << fixed(p.t, 6) << ',' << fixed(p.x, 6) << ',' << fixed(p.y, 6) << ','
        << fixed(p.yaw, 6) << ',' << pose_source_name(p.source) << '\n';
  }
}

std::vector<LocalPose> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kDatasetNotFound, "cannot open " + path.string());
  std::vector<LocalPose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("t,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4 && fields.size() != 5) {
      throw FormatError(path.string(), lineno, "expected t,x,y,yaw[,source]");
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      const std::string& f = fields[k];
      const char* end = f.data() + f.size();
      auto [p, ec] = std::from_chars(f.data(), end, v[k]);
      if (ec != std::errc() || p != end || !std::isfinite(v[k])) {
        throw FormatError(path.string(), lineno, "bad number '" + f + "'");
      }
    }
    LocalPose pose;
    pose.t = v[0];
    pose.x = v[1];
    pose.y = v[2];
    pose.yaw = v[3];
    if (fields.size() == 5) {
      const std::string& s = fields[4];
      if (s == "gps") {
        pose.source = PoseSource::kGps;
      } else if (s == "lidar") {
        pose.source = PoseSource::kLidar;
      } else if (s == "fused") {
        pose.source = PoseSource::kFused;
      } else {
        throw FormatError(path.string(), lineno, "unknown source '" + s + "'");
      }
    }
    if (!poses.empty() && !(pose.t > poses.back().t)) {
      throw FormatError(path.string(), lineno, "timestamps must increase");
    }
    poses.push_back(pose);
  }
  return poses;
}

void write_per_pair_csv(std::ostream& out, const RunReport& report) {
  out << "index,t,status,failure,keyframe,yaw,dx,dy,score,points_source,points_target,"
         "rejected_fraction\n";
  for (const auto& r : report.per_pair) {
    out << r.index << ',' << fixed(r.t, 6) << ',' << pair_status_name(r.status) << ','
        << r.failure << ',' << r.keyframe << ',' << fixed(r.motion.yaw, 9) << ','
        << fixed(r.motion.dx, 6) << ',' << fixed(r.motion.dy, 6) << ',' << fixed(r.score, 6)
        << ',' << r.points_source << ',' << r.points_target << ','
        << fixed(r.rejected_fraction, 6) << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const RunReport& report) {
  out << "track,final_yaw_drift_deg,travelled_distance_est,travelled_distance_truth,"
         "rpe_translation_rmse,rpe_yaw_rmse_deg,ate_rmse,match_failure_fraction,matched_poses\n";
  if (!report.has_metrics) return;
  write_metrics_row(out, "odometry", report.odometry_metrics);
  write_metrics_row(out, "fused", report.fused_metrics);
}

void write_timing_csv(std::ostream& out, const std::vector<StageSummary>& timing) {
  out << "stage,count,mean_s,p50_s,p95_s,min_s\n";
  for (const auto& s : timing) {
    out << s.stage << ',' << s.count << ',' << fixed(s.mean, 6) << ',' << fixed(s.p50, 6) << ','
        << fixed(s.p95, 6) << ',' << fixed(s.min, 6) << '\n';
  }
}

void write_bench_csv(std::ostream& out, const BenchReport& bench) {
  out << "index,points,bucket,failure,preprocess_s,features_s,prealign_s,icp_s,project_s,"
         "rotate_correlate_s,mean_total_s,min_total_s\n";
  for (const auto& p : bench.pairs) {
    const auto& m = p.mean;
    out << p.index << ',' << p.points << ',' << p.bucket << ',' << p.failure << ','
        << fixed(m.preprocess, 6) << ',' << fixed(m.features, 6) << ',' << fixed(m.prealign, 6)
        << ',' << fixed(m.icp, 6) << ',' << fixed(m.project, 6) << ','
        << fixed(m.rotate_correlate, 6) << ',' << fixed(m.total, 6) << ','
        << fixed(p.min_total, 6) << '\n';
  }
}

void write_bench_buckets_csv(std::ostream& out, const BenchReport& bench) {
  out << "bucket,lo,hi,pairs,mean_total_s,min_total_s,hz\n";
  for (const auto& b : bench.buckets) {
    const std::string hi =
        b.hi == std::numeric_limits<std::size_t>::max() ? "inf" : std::to_string(b.hi);
    out << b.label << ',' << b.lo << ',' << hi << ',' << b.pairs << ',' << fixed(b.mean_total, 6)
        << ',' << fixed(b.min_total, 6) << ','
        << fixed(b.mean_total > 0.0 ? 1.0 / b.mean_total : 0.0, 3) << '\n';
  }
}

void write_svg_chart(std::ostream& out, const std::vector<Series>& series,
                     const ChartOptions& options) {
  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = options.width - left - right;
  const double ph = options.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  if (options.equal_axes) {
    const double scale = std::max((x1 - x0) / pw, (y1 - y0) / ph);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * scale * pw;
    x1 = cx + 0.5 * scale * pw;
    y0 = cy - 0.5 * scale * ph;
    y1 = cy + 0.5 * scale * ph;
  }
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << escape_xml(options.title)
      << "</text>\n";

  const double xs = tick_step(x1 - x0, 8), ys = tick_step(y1 - y0, 6);
  for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9; v += xs) {
    out << "<line x1=\"" << fixed(px(v), 1) << "\" y1=\"" << top << "\" x2=\"" << fixed(px(v), 1)
        << "\" y2=\"" << top + ph << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << fixed(px(v), 1) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << fixed(v, xs < 1 ? 2 : 0) << "</text>\n";
  }
  for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9; v += ys) {
    out << "<line x1=\"" << left << "\" y1=\"" << fixed(py(v), 1) << "\" x2=\"" << left + pw
        << "\" y2=\"" << fixed(py(v), 1) << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(v) + 4, 1)
        << "\" text-anchor=\"end\">" << fixed(v, ys < 1 ? 2 : 0) << "</text>\n";
  }
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << options.height - 10
      << "\" text-anchor=\"middle\">" << escape_xml(options.x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(options.y_label) << "</text>\n";

  int legend_row = 0;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      out << "<g fill=\"" << s.color << "\">\n";
      for (std::size_t i = 0; i < n; ++i) {
        out << "<circle cx=\"" << fixed(px(s.x[i]), 2) << "\" cy=\"" << fixed(py(s.y[i]), 2)
            << "\" r=\"2\"/>\n";
      }
      out << "</g>\n";
    } else if (n > 0) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i) {
        out << (i ? " " : "") << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2);
      }
      out << "\"/>\n";
    }
    const double ly = top + 10 + 18 * legend_row++;
    out << "<rect x=\"" << left + pw + 12 << "\" y=\"" << ly - 8 << "\" width=\"14\" height=\"4\" fill=\""
        << s.color << "\"/>\n";
    out << "<text x=\"" << left + pw + 32 << "\" y=\"" << ly << "\">" << escape_xml(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_run_outputs(const std::filesystem::path& dir, const RunReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kInvalidArgument, "cannot create " + dir.string());

  {
    auto out = open_output(dir / "trajectory.csv");
    write_trajectory_csv(out, report.trajectory);
  }
  {
    auto out = open_output(dir / "odometry.csv");
    write_trajectory_csv(out, report.odometry);
  }
  {
    auto out = open_output(dir / "gps.csv");
    out << "t,x,y,trust\n";
    for (std::size_t i = 0; i < report.gps_track.size(); ++i) {
      const auto& p = report.gps_track[i];
      out << fixed(p.t, 6) << ',' << fixed(p.x, 6) << ',' << fixed(p.y, 6) << ','
          << (i < report.gps_trust.size() ? gps_trust_name(report.gps_trust[i]) : "") << '\n';
    }
  }
  {
    auto out = open_output(dir / "per_pair.csv");
    write_per_pair_csv(out, report);
  }
  {
    auto out = open_output(dir / "metrics.csv");
    write_metrics_csv(out, report);
  }
  {
    auto out = open_output(dir / "timing.csv");
    write_timing_csv(out, report.timing);
  }

  // Odometry lives in its own frame; show it start-aligned to whatever
  // reference is available so the tracks overlay.
  std::vector<LocalPose> odometry = report.odometry;
  if (!report.truth.empty()) {
    odometry = start_align(report.odometry, report.truth);
  } else if (!report.trajectory.empty()) {
    odometry = start_align(report.odometry, report.trajectory);
  }

  const auto xy_series = [](const std::string& name, const std::string& color,
                            const std::vector<LocalPose>& poses, bool markers) {
    Series s{name, color, {}, {}, markers};
    for (const auto& p : poses) {
      s.x.push_back(p.x);
      s.y.push_back(p.y);
    }
    return s;
  };
  const auto yaw_series = [](const std::string& name, const std::string& color,
                             const std::vector<LocalPose>& poses) {
    Series s{name, color, column_t(poses), {}, false};
    for (const auto& p : poses) s.y.push_back(p.yaw * kRadToDeg);
    return s;
  };

  {
    std::vector<Series> series;
    if (!report.truth.empty()) series.push_back(xy_series("truth", "#888888", report.truth, false));
    series.push_back(xy_series("gps", "#d62728", report.gps_track, true));
    series.push_back(xy_series("odometry", "#1f77b4", odometry, false));
    series.push_back(xy_series("fused", "#2ca02c", report.trajectory, false));
    auto out = open_output(dir / "trajectory.svg");
    write_svg_chart(out, series, {"Trajectory", "x [m]", "y [m]", true});
  }
  {
    std::vector<Series> series;
    if (!report.truth.empty()) series.push_back(yaw_series("truth", "#888888", report.truth));
    series.push_back(yaw_series("odometry", "#1f77b4", odometry));
    series.push_back(yaw_series("fused", "#2ca02c", report.trajectory));
    auto out = open_output(dir / "yaw.svg");
    write_svg_chart(out, series, {"Heading", "t [s]", "yaw [deg]"});
  }
  {
    std::vector<Series> series;
    if (!report.truth.empty()) {
      const auto drift = [&](const std::string& name, const std::string& color,
                             const std::vector<LocalPose>& poses, bool yaw) {
        Series s{name, color, {}, {}, false};
        for (const auto& p : poses) {
          const LocalPose tr = interpolate_pose(report.truth, p.t);
          s.x.push_back(p.t);
          s.y.push_back(yaw ? std::fabs(wrap_angle(p.yaw - tr.yaw)) * kRadToDeg
                            : std::hypot(p.x - tr.x, p.y - tr.y));
        }
        return s;
      };
      series.push_back(drift("odometry position [m]", "#1f77b4", odometry, false));
      series.push_back(drift("fused position [m]", "#2ca02c", report.trajectory, false));
      series.push_back(drift("odometry yaw [deg]", "#9467bd", odometry, true));
    }
    auto out = open_output(dir / "drift.svg");
    write_svg_chart(out, series, {"Drift against truth", "t [s]", "error"});
  }
}

}  // namespace lidarnav

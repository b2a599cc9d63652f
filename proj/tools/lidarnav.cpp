// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// lidarnav command-line tool. Exit codes: 0 success, 2 usage error,
// 3 data error, 4 internal failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidarnav/cloud_io.hpp"
#include "lidarnav/config.hpp"
#include "lidarnav/error.hpp"
#include "lidarnav/pipeline.hpp"
#include "lidarnav/planar.hpp"
#include "lidarnav/registration.hpp"
#include "lidarnav/report.hpp"
#include "lidarnav/sim.hpp"

namespace fs = std::filesystem;
using namespace lidarnav;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;
constexpr double kRadToDeg = 57.29577951308232;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::string method;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_method) {
  cmd->add_option("--config", opt.config_file, "Config file of 'key = value' lines")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opt.overrides, "Override one config key, e.g. --set planar.resolution=0.4");
  cmd->add_option("--seed", opt.seed, "Master seed");
  if (with_method) {
    cmd->add_option("--method", opt.method, "Registration method")
        ->check(CLI::IsMember({"full6d", "planar"}));
  }
}

AppConfig load_config(const CommonOptions& opt) {
  AppConfig cfg;
  if (!opt.config_file.empty()) apply_config_file(cfg, opt.config_file);
  for (const std::string& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--set expects key=value, got '" + kv + "'");
    }
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) {
    cfg.pipeline.seed = *opt.seed;
    cfg.sim.seed = *opt.seed;
  }
  if (!opt.method.empty()) cfg.pipeline.method = parse_method(opt.method);
  return cfg;
}

void print_metrics(const char* label, const Metrics& m) {
  std::printf(
      "%-9s yaw drift %.3f deg  distance %.2f / %.2f m  RPE %.4f m, %.4f deg  ATE %.3f m  "
      "failures %.3f\n",
      label, m.final_yaw_drift, m.travelled_distance_est, m.travelled_distance_truth,
      m.rpe_translation_rmse, m.rpe_yaw_rmse, m.ate_rmse, m.match_failure_fraction);
}

int cmd_simulate(const CommonOptions& opt, const std::string& out, bool write_cfg) {
  const AppConfig cfg = load_config(opt);
  const SimRun run(cfg.sim.load_scene(), cfg.sim.trajectory(), cfg.sim.lidar_model(), cfg.sim.gps,
                   cfg.sim.seed, cfg.sim.options);
  fs::create_directories(out);
  write_dataset(out, run);
  if (write_cfg) {
    std::ofstream f(fs::path(out) / "config.txt");
    write_config(f, cfg);
  }
  std::printf("wrote %zu scans and %zu GPS fixes to %s\n", run.scan_count(), run.gps_log().size(),
              out.c_str());
  return 0;
}

int cmd_register(const CommonOptions& opt, const std::string& source, const std::string& target) {
  const AppConfig cfg = load_config(opt);
  const PointCloud src = read_cloud(source);
  const PointCloud tgt = read_cloud(target);
  if (cfg.pipeline.method == Method::kFull6d) {
    RegistrationConfig reg = cfg.pipeline.registration;
    reg.seed = cfg.pipeline.seed;
    const RegistrationResult r = register_scans(src, tgt, cfg.pipeline.preprocess, reg);
    const PosedTransform& m = r.motion;
    const Eigen::Vector3d t = m.transform.translation;
    std::printf("method full6d\n");
    std::printf("translation %s %s %s\n", format_double(t.x()).c_str(),
                format_double(t.y()).c_str(), format_double(t.z()).c_str());
    std::printf("yaw_deg %s\npitch_deg %s\nroll_deg %s\n",
                format_double(m.yaw * kRadToDeg).c_str(),
                format_double(m.pitch * kRadToDeg).c_str(),
                format_double(m.roll * kRadToDeg).c_str());
    std::printf("fitness %s\ninliers %zu\nicp_iterations %zu\n", format_double(m.fitness).c_str(),
                m.inlier_count, static_cast<std::size_t>(r.icp_iterations));
  } else {
    const PlanarMotion m =
        match_planar(src, tgt, cfg.pipeline.planar, cfg.pipeline.preprocess);
    std::printf("method planar\n");
    std::printf("yaw_deg %s\ndx %s\ndy %s\nscore %s\n", format_double(m.yaw * kRadToDeg).c_str(),
                format_double(m.dx).c_str(), format_double(m.dy).c_str(),
                format_double(m.score).c_str());
  }
  return 0;
}

void write_projections(const fs::path& dir, const ScanSequence& seq, const PipelineConfig& cfg) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const PointCloud c = crop_range(seq.load(i), cfg.preprocess);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.pgm", i);
    std::ofstream f(dir / name);
    write_pgm(f, project_to_image(c, cfg.planar.canvas));
  }
}

int cmd_run(const CommonOptions& opt, const std::string& dataset, const std::string& out,
            bool projections) {
  const AppConfig cfg = load_config(opt);
  const DatasetReader reader(dataset);
  const ScanSequence seq = make_sequence(reader);
  const RunReport report = run_pipeline(seq, cfg.pipeline);
  write_run_outputs(out, report);
  if (projections) write_projections(fs::path(out) / "projections", seq, cfg.pipeline);

  std::size_t failed = 0;
  for (const auto& r : report.per_pair) failed += r.status != PairStatus::kMatched;
  std::printf("method %s: %zu pairs, %zu not matched\n",
              std::string(method_name(report.method)).c_str(), report.per_pair.size(), failed);
  if (report.has_metrics) {
    print_metrics("odometry", report.odometry_metrics);
    print_metrics("fused", report.fused_metrics);
    std::printf("throughput %.2f Hz\n", report.odometry_metrics.throughput_hz);
  }
  std::printf("outputs in %s\n", out.c_str());
  return 0;
}

int cmd_eval(const std::string& estimated, const std::string& truth, const std::string& out) {
  const auto est = read_trajectory_csv(estimated);
  const auto tru = read_trajectory_csv(truth);
  const Metrics m = compute_metrics(est, tru);
  print_metrics("estimate", m);
  if (!out.empty()) {
    RunReport r;
    r.has_metrics = true;
    r.odometry_metrics = m;
    r.fused_metrics = m;
    fs::create_directories(out);
    std::ofstream f(fs::path(out) / "metrics.csv");
    f << "track,final_yaw_drift_deg,travelled_distance_est,travelled_distance_truth,"
         "rpe_translation_rmse,rpe_yaw_rmse_deg,ate_rmse,match_failure_fraction,matched_poses\n";
    f << "estimate," << format_double(m.final_yaw_drift) << ','
      << format_double(m.travelled_distance_est) << ',' << format_double(m.travelled_distance_truth)
      << ',' << format_double(m.rpe_translation_rmse) << ',' << format_double(m.rpe_yaw_rmse)
      << ',' << format_double(m.ate_rmse) << ',' << format_double(m.match_failure_fraction) << ','
      << m.matched_poses << '\n';
  }
  return 0;
}

int cmd_bench(const CommonOptions& opt, const std::string& dataset, const std::string& out,
              std::size_t repetitions) {
  const AppConfig cfg = load_config(opt);
  const DatasetReader reader(dataset);
  const ScanSequence seq = make_sequence(reader);
  std::vector<Method> methods;
  if (opt.method.empty()) {
    methods = {Method::kFull6d, Method::kPlanar};
  } else {
    methods = {cfg.pipeline.method};
  }
  if (!out.empty()) fs::create_directories(out);
  for (Method m : methods) {
    const BenchReport b = benchmark(seq, m, cfg.pipeline, repetitions);
    const std::string name(method_name(m));
    std::printf("%s: %.2f Hz end to end over %zu pairs, bucket Spearman %.3f\n", name.c_str(),
                b.end_to_end_hz, b.pairs.size(), b.bucket_spearman);
    for (const auto& bucket : b.buckets) {
      std::printf("  %-8s %4zu pairs  mean %.4f s  min %.4f s\n", bucket.label.c_str(),
                  bucket.pairs, bucket.mean_total, bucket.min_total);
    }
    if (!out.empty()) {
      std::ofstream pairs(fs::path(out) / ("bench_" + name + ".csv"));
      write_bench_csv(pairs, b);
      std::ofstream buckets(fs::path(out) / ("bench_" + name + "_buckets.csv"));
      write_bench_buckets_csv(buckets, b);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR odometry and GPS fusion for surface vehicles"};
  app.require_subcommand(1);

  CommonOptions sim_opt, reg_opt, run_opt, bench_opt;
  std::string sim_out, reg_source, reg_target, run_dataset, run_out = "out", eval_est, eval_truth,
                                                               eval_out, bench_dataset, bench_out;
  bool sim_write_cfg = false, run_projections = false;
  std::size_t repetitions = 3;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_common(sim, sim_opt, false);
  sim->add_option("--out", sim_out, "Dataset directory")->required();
  sim->add_flag("--write-config", sim_write_cfg, "Also write the effective config");

  auto* reg = app.add_subcommand("register", "Match a single pair of scans");
  add_common(reg, reg_opt, true);
  reg->add_option("--source", reg_source, "Source cloud")->required()->check(CLI::ExistingFile);
  reg->add_option("--target", reg_target, "Target cloud")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Odometry, fusion and metrics over a dataset");
  add_common(run, run_opt, true);
  run->add_option("--dataset", run_dataset, "Dataset directory")->required();
  run->add_option("--out", run_out, "Output directory")->capture_default_str();
  run->add_flag("--projections", run_projections, "Write per-scan PGM projections");

  auto* eval = app.add_subcommand("eval", "Metrics of an estimated trajectory against truth");
  eval->add_option("--estimated", eval_est, "Trajectory CSV (t,x,y,yaw[,source])")->required();
  eval->add_option("--truth", eval_truth, "Truth CSV (t,x,y,yaw)")->required();
  eval->add_option("--out", eval_out, "Directory for metrics.csv");

  auto* bench = app.add_subcommand("bench", "Per-stage timing by point-count bucket");
  add_common(bench, bench_opt, true);
  bench->add_option("--dataset", bench_dataset, "Dataset directory")->required();
  bench->add_option("--repetitions", repetitions, "Timed repetitions per pair")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Directory for bench CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_opt, sim_out, sim_write_cfg);
    if (*reg) return cmd_register(reg_opt, reg_source, reg_target);
    if (*run) return cmd_run(run_opt, run_dataset, run_out, run_projections);
    if (*eval) return cmd_eval(eval_est, eval_truth, eval_out);
    if (*bench) return cmd_bench(bench_opt, bench_dataset, bench_out, repetitions);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}

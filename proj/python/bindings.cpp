// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python module `lidarnav._core`. Clouds cross the boundary as (N, 4) float64
// arrays of x, y, z, intensity; rigid transforms as 4x4 homogeneous matrices.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "lidarnav/cloud_io.hpp"
#include "lidarnav/config.hpp"
#include "lidarnav/error.hpp"
#include "lidarnav/metrics.hpp"
#include "lidarnav/nmea.hpp"
#include "lidarnav/pipeline.hpp"
#include "lidarnav/planar.hpp"
#include "lidarnav/registration.hpp"
#include "lidarnav/report.hpp"
#include "lidarnav/sim.hpp"

namespace py = pybind11;
using namespace lidarnav;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() != 2 || (a.shape(1) != 3 && a.shape(1) != 4)) {
    throw Error(ErrorCode::kDimensionMismatch, "cloud must be an (N, 3) or (N, 4) array");
  }
  const auto v = a.unchecked<2>();
  PointCloud c;
  c.points.reserve(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    c.points.push_back({v(i, 0), v(i, 1), v(i, 2), a.shape(1) == 4 ? v(i, 3) : 0.0});
  }
  return c;
}

Array from_cloud(const PointCloud& c) {
  Array out({static_cast<py::ssize_t>(c.size()), py::ssize_t{4}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Point3& p = c.points[i];
    v(i, 0) = p.x;
    v(i, 1) = p.y;
    v(i, 2) = p.z;
    v(i, 3) = p.intensity;
  }
  return out;
}

Eigen::Matrix4d to_matrix(const RigidTransform& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = t.rotation;
  m.topRightCorner<3, 1>() = t.translation;
  return m;
}

RigidTransform from_matrix(const Eigen::Matrix4d& m) {
  RigidTransform t;
  t.rotation = m.topLeftCorner<3, 3>();
  t.translation = m.topRightCorner<3, 1>();
  return t;
}

// Settings are dotted config keys; values go through the same parser as
// config files, so numbers, booleans and strings all work.
AppConfig make_config(const py::dict& settings) {
  AppConfig cfg;
  for (const auto& [key, value] : settings) {
    std::string text = py::isinstance<py::bool_>(value)
                           ? (value.cast<bool>() ? "true" : "false")
                           : py::str(value).cast<std::string>();
    set_config_value(cfg, key.cast<std::string>(), text);
  }
  return cfg;
}

Array poses_to_array(const std::vector<LocalPose>& poses) {
  Array out({static_cast<py::ssize_t>(poses.size()), py::ssize_t{4}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    v(i, 0) = poses[i].t;
    v(i, 1) = poses[i].x;
    v(i, 2) = poses[i].y;
    v(i, 3) = poses[i].yaw;
  }
  return out;
}

std::vector<LocalPose> array_to_poses(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 4) {
    throw Error(ErrorCode::kDimensionMismatch, "trajectory must be an (N, 4) array of t, x, y, yaw");
  }
  const auto v = a.unchecked<2>();
  std::vector<LocalPose> out(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    out[i].t = v(i, 0);
    out[i].x = v(i, 1);
    out[i].y = v(i, 2);
    out[i].yaw = v(i, 3);
  }
  return out;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["final_yaw_drift"] = m.final_yaw_drift;
  d["travelled_distance_est"] = m.travelled_distance_est;
  d["travelled_distance_truth"] = m.travelled_distance_truth;
  d["rpe_translation_rmse"] = m.rpe_translation_rmse;
  d["rpe_yaw_rmse"] = m.rpe_yaw_rmse;
  d["ate_rmse"] = m.ate_rmse;
  d["match_failure_fraction"] = m.match_failure_fraction;
  d["throughput_hz"] = m.throughput_hz;
  d["matched_poses"] = m.matched_poses;
  return d;
}

ProjectionImage to_image(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kDimensionMismatch, "image must be 2-D");
  ProjectionCanvas canvas;
  canvas.height = static_cast<int>(a.shape(0));
  canvas.width = static_cast<int>(a.shape(1));
  canvas.validate();
  ProjectionImage img = make_image(canvas);
  std::copy(a.data(), a.data() + a.size(), img.values.begin());
  return img;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LiDAR scan matching and GPS fusion for surface vessels";

  py::register_exception<Error>(m, "LidarnavError", PyExc_RuntimeError);

  m.def("estimate_rigid_transform",
        [](const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>& source,
           const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>& target) {
          if (source.rows() != target.rows()) {
            throw Error(ErrorCode::kDimensionMismatch, "source and target differ in length");
          }
          std::vector<Eigen::Vector3d> s(source.rows()), t(target.rows());
          for (Eigen::Index i = 0; i < source.rows(); ++i) {
            s[i] = source.row(i).transpose();
            t[i] = target.row(i).transpose();
          }
          return to_matrix(estimate_rigid_transform(s, t));
        },
        py::arg("source"), py::arg("target"),
        "Least-squares 4x4 transform mapping source rows onto target rows.");

  m.def("transform_from_components",
        [](double yaw, double pitch, double roll, const Eigen::Vector3d& t) {
          return to_matrix(transform_from_components(yaw, pitch, roll, t));
        },
        py::arg("yaw"), py::arg("pitch") = 0.0, py::arg("roll") = 0.0,
        py::arg("translation") = Eigen::Vector3d::Zero().eval());

  m.def("apply_transform",
        [](const Eigen::Matrix4d& t, const Array& cloud) {
          return from_cloud(apply_transform(from_matrix(t), to_cloud(cloud)));
        },
        py::arg("transform"), py::arg("cloud"));

  m.def("read_cloud", [](const std::filesystem::path& p) { return from_cloud(read_cloud(p)); });
  m.def("write_cloud", [](const std::filesystem::path& p, const Array& c) {
    write_cloud(p, to_cloud(c));
  });

  m.def("register_scans",
        [](const Array& source, const Array& target, const py::dict& settings) {
          const AppConfig cfg = make_config(settings);
          const RegistrationResult r =
              register_scans(to_cloud(source), to_cloud(target), cfg.pipeline.preprocess,
                             cfg.pipeline.registration);
          py::dict d;
          d["transform"] = to_matrix(r.motion.transform);
          d["yaw"] = r.motion.yaw;
          d["pitch"] = r.motion.pitch;
          d["roll"] = r.motion.roll;
          d["fitness"] = r.motion.fitness;
          d["inliers"] = r.motion.inlier_count;
          d["refined"] = r.stage == RegistrationStage::kRefined;
          d["rejected_fraction"] = r.rejected_fraction;
          return d;
        },
        py::arg("source"), py::arg("target"), py::arg("settings") = py::dict(),
        "Full 6-DoF registration; the transform maps source onto target.");

  m.def("match_planar",
        [](const Array& source, const Array& target, const py::dict& settings) {
          const AppConfig cfg = make_config(settings);
          const PlanarMotion r = match_planar(to_cloud(source), to_cloud(target),
                                              cfg.pipeline.planar, cfg.pipeline.preprocess);
          py::dict d;
          d["yaw"] = r.yaw;
          d["dx"] = r.dx;
          d["dy"] = r.dy;
          d["score"] = r.score;
          return d;
        },
        py::arg("source"), py::arg("target"), py::arg("settings") = py::dict());

  m.def("phase_correlate",
        [](const Array& a, const Array& b, bool window, bool subpixel) {
          const PixelShift s = phase_correlate(to_image(a), to_image(b), {window, subpixel});
          return py::make_tuple(s.dx_px, s.dy_px, s.peak);
        },
        py::arg("a"), py::arg("b"), py::arg("window") = false, py::arg("subpixel") = false,
        "Shift (dx, dy, peak) of b relative to a, in pixels.");

  m.def("nmea_checksum", [](const std::string& payload) { return nmea_checksum(payload); });
  m.def("parse_nmea_gga", [](const std::string& sentence) {
    const GpsFix f = parse_nmea_gga(sentence);
    py::dict d;
    d["time_of_day"] = f.time_of_day;
    d["latitude"] = f.latitude;
    d["longitude"] = f.longitude;
    d["fix_quality"] = f.fix_quality;
    d["satellites"] = f.satellites;
    d["hdop"] = f.hdop;
    d["altitude"] = f.altitude;
    return d;
  });
  m.def("geodetic_to_local",
        [](double lat, double lon, double ref_lat, double ref_lon) {
          const Eigen::Vector2d xy = geodetic_to_local(lat, lon, {ref_lat, ref_lon});
          return py::make_tuple(xy.x(), xy.y());
        },
        py::arg("latitude"), py::arg("longitude"), py::arg("ref_latitude"),
        py::arg("ref_longitude"));

  m.def("bundled_scene_names", &bundled_scene_names);
  m.def("raycast_scan",
        [](const std::string& scene, double x, double y, double yaw, std::uint64_t seed) {
          SimConfig sc;
          sc.scene = scene;
          LocalPose pose;
          pose.x = x;
          pose.y = y;
          pose.yaw = yaw;
          return from_cloud(raycast_scan(sc.load_scene(), pose, sc.lidar_model(), seed));
        },
        py::arg("scene"), py::arg("x"), py::arg("y") = 0.0, py::arg("yaw") = 0.0,
        py::arg("seed") = 0, "One sweep in the sensor frame; scene is a bundled name or file.");

  m.def("simulate",
        [](const std::filesystem::path& out, const py::dict& settings) {
          const AppConfig cfg = make_config(settings);
          const SimRun run(cfg.sim.load_scene(), cfg.sim.trajectory(), cfg.sim.lidar_model(),
                           cfg.sim.gps, cfg.sim.seed, cfg.sim.options);
          write_dataset(out, run);
          return run.scan_count();
        },
        py::arg("out"), py::arg("settings") = py::dict(),
        "Writes a synthetic dataset directory and returns the scan count.");

  m.def("run",
        [](const std::filesystem::path& dataset, const py::object& out, const py::dict& settings) {
          const AppConfig cfg = make_config(settings);
          const RunReport r = run_pipeline(dataset, cfg.pipeline);
          if (!out.is_none()) write_run_outputs(out.cast<std::filesystem::path>(), r);
          py::dict d;
          d["trajectory"] = poses_to_array(r.trajectory);
          d["odometry"] = poses_to_array(r.odometry);
          d["truth"] = poses_to_array(r.truth);
          std::size_t failed = 0;
          for (const auto& p : r.per_pair) failed += p.status != PairStatus::kMatched;
          d["failed_pairs"] = failed;
          if (r.has_metrics) {
            d["odometry_metrics"] = metrics_dict(r.odometry_metrics);
            d["fused_metrics"] = metrics_dict(r.fused_metrics);
          }
          return d;
        },
        py::arg("dataset"), py::arg("out") = py::none(), py::arg("settings") = py::dict(),
        "Runs odometry and fusion over a dataset; optionally writes the CSV/SVG outputs.");

  m.def("compute_metrics",
        [](const Array& estimated, const Array& truth) {
          return metrics_dict(compute_metrics(array_to_poses(estimated), array_to_poses(truth)));
        },
        py::arg("estimated"), py::arg("truth"));

  m.def("config_keys", &config_keys);
}

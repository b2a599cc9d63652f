// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/planar.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>

#include "fft2d.hpp"
#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

void check_same_size(const ProjectionImage& a, const ProjectionImage& b) {
  if (a.canvas.width != b.canvas.width || a.canvas.height != b.canvas.height ||
      a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.canvas.width) + "x" + std::to_string(a.canvas.height) +
                    " vs " + std::to_string(b.canvas.width) + "x" +
                    std::to_string(b.canvas.height));
  }
}

// Bilinear inverse mapping about the canvas centre; samples outside read 0.
// Only the rows and columns that can receive non-zero content are resampled.
void rotate_values(const double* src, const ProjectionCanvas& canvas, double yaw, double* dst) {
  const int w = canvas.width;
  const int h = canvas.height;
  const double cx = canvas.center_col();
  const double cy = canvas.center_row();
  const double c = std::cos(yaw), s = std::sin(yaw);

  int rmin = h, rmax = -1, cmin = w, cmax = -1;
  for (int r = 0; r < h; ++r) {
    for (int col = 0; col < w; ++col) {
      if (src[r * w + col] != 0.0) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        cmin = std::min(cmin, col);
        cmax = std::max(cmax, col);
      }
    }
  }
  std::fill(dst, dst + static_cast<std::ptrdiff_t>(w) * h, 0.0);
  if (rmax < 0) return;
  // Forward-rotate the source box corners to bound the destination.
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const int r : {rmin - 1, rmax + 1}) {
    for (const int col : {cmin - 1, cmax + 1}) {
      const double x = col - cx, y = cy - r;
      const double xd = c * x - s * y, yd = s * x + c * y;
      xlo = std::min(xlo, xd);
      xhi = std::max(xhi, xd);
      ylo = std::min(ylo, yd);
      yhi = std::max(yhi, yd);
    }
  }
  const int c_begin = std::max(0, static_cast<int>(std::floor(cx + xlo)) - 1);
  const int c_end = std::min(w, static_cast<int>(std::ceil(cx + xhi)) + 2);
  const int r_begin = std::max(0, static_cast<int>(std::floor(cy - yhi)) - 1);
  const int r_end = std::min(h, static_cast<int>(std::ceil(cy - ylo)) + 2);

  const auto sample = [&](int rr, int cc) {
    return (rr >= 0 && rr < h && cc >= 0 && cc < w) ? src[rr * w + cc] : 0.0;
  };
  for (int r = r_begin; r < r_end; ++r) {
    const double y = cy - r;
    double* row_out = dst + static_cast<std::ptrdiff_t>(r) * w;
    // Where each pixel's content came from, stepped along the row.
    const double x0 = c_begin - cx;
    double fc = cx + (c * x0 + s * y);
    double fr = cy - (-s * x0 + c * y);
    for (int col = c_begin; col < c_end; ++col, fc += c, fr += s) {
      // Offsetting by 2 keeps the truncation a floor for fc, fr > -2.
      const int c0 = static_cast<int>(fc + 2.0) - 2;
      const int r0 = static_cast<int>(fr + 2.0) - 2;
      const double tc = fc - c0, tr = fr - r0;
      if (c0 >= 0 && c0 + 1 < w && r0 >= 0 && r0 + 1 < h) {
        const double* p = src + r0 * w + c0;
        row_out[col] =
            (1 - tr) * ((1 - tc) * p[0] + tc * p[1]) + tr * ((1 - tc) * p[w] + tc * p[w + 1]);
      } else if (c0 >= -1 && c0 < w && r0 >= -1 && r0 < h) {
        row_out[col] = (1 - tr) * ((1 - tc) * sample(r0, c0) + tc * sample(r0, c0 + 1)) +
                       tr * ((1 - tc) * sample(r0 + 1, c0) + tc * sample(r0 + 1, c0 + 1));
      }
    }
  }
}

// Holds the target spectrum so a sweep transforms the target once.
class Correlator {
 public:
  Correlator(const ProjectionImage& target, const CorrelationOptions& options)
      : rows_(target.canvas.height),
        cols_(target.canvas.width),
        options_(options),
        fft_(rows_, cols_) {
    if (options_.window) {
      win_rows_ = hann(rows_);
      win_cols_ = hann(cols_);
    }
    load(target);
    fft_.forward();
    auto spec = fft_.spectrum();
    target_spectrum_.assign(spec.begin(), spec.end());
  }

  PixelShift correlate(const ProjectionImage& source) {
    load(source);
    return correlate_loaded();
  }

  // Correlates whatever was written into input() (already windowed).
  PixelShift correlate_loaded() {
    fft_.forward();
    auto spec = fft_.spectrum();
    // conj(source) * target, written out to skip the library's inf/nan handling.
    double max_norm = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double sr = spec[i].real(), si = spec[i].imag();
      const double tr = target_spectrum_[i].real(), ti = target_spectrum_[i].imag();
      spec[i] = {sr * tr + si * ti, sr * ti - si * tr};
      max_norm = std::max(max_norm, spec[i].real() * spec[i].real() + spec[i].imag() * spec[i].imag());
    }
    const double floor = max_norm * 1e-24;
    for (auto& c : spec) {
      const double n = c.real() * c.real() + c.imag() * c.imag();
      const double k = n > floor ? 1.0 / std::sqrt(n) : 0.0;
      c = {c.real() * k, c.imag() * k};
    }

    fft_.inverse();
    const auto surface = fft_.real();
    const double scale = 1.0 / (static_cast<double>(rows_) * cols_);

    std::size_t best = 0;
    for (std::size_t i = 1; i < surface.size(); ++i) {
      if (surface[i] > surface[best]) best = i;
    }
    const int r = static_cast<int>(best) / cols_;
    const int c = static_cast<int>(best) % cols_;
    PixelShift out;
    out.peak = std::clamp(surface[best] * scale, 0.0, 1.0);
    out.dy_px = r > rows_ / 2 ? r - rows_ : r;
    out.dx_px = c > cols_ / 2 ? c - cols_ : c;
    if (options_.subpixel) {
      const auto at = [&](int rr, int cc) {
        rr = (rr + rows_) % rows_;
        cc = (cc + cols_) % cols_;
        return surface[rr * cols_ + cc];
      };
      out.dx_px += parabolic(at(r, c - 1), at(r, c), at(r, c + 1));
      out.dy_px += parabolic(at(r - 1, c), at(r, c), at(r + 1, c));
    }
    return out;
  }

  std::span<double> input() { return fft_.real(); }

  /// Source values with the correlation window applied.
  std::vector<double> windowed(const ProjectionImage& image) const {
    std::vector<double> out(image.values);
    if (options_.window) {
      for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) out[r * cols_ + c] *= win_rows_[r] * win_cols_[c];
      }
    }
    return out;
  }

 private:
  static double parabolic(double left, double center, double right) {
    const double denom = left - 2.0 * center + right;
    if (denom >= 0.0) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
  }

  void load(const ProjectionImage& image) {
    auto real = fft_.real();
    if (!options_.window) {
      std::copy(image.values.begin(), image.values.end(), real.begin());
      return;
    }
    for (int r = 0; r < rows_; ++r) {
      for (int c = 0; c < cols_; ++c) {
        real[r * cols_ + c] = image.values[r * cols_ + c] * win_rows_[r] * win_cols_[c];
      }
    }
  }

  int rows_;
  int cols_;
  CorrelationOptions options_;
  detail::Fft2d fft_;
  std::vector<double> win_rows_;
  std::vector<double> win_cols_;
  std::vector<std::complex<double>> target_spectrum_;
};

}  // namespace

void ProjectionCanvas::validate() const {
  if (width < 32 || height < 32 || width % 2 != 0 || height % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "canvas sides must be even and >= 32");
  }
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "resolution must be > 0");
  if (value_mode == ValueMode::kCount && saturation < 1) {
    throw Error(ErrorCode::kInvalidArgument, "saturation must be >= 1");
  }
}

void PlanarConfig::validate() const {
  canvas.validate();
  if (!(yaw_step > 0.0) || !(yaw_range >= yaw_step)) {
    throw Error(ErrorCode::kInvalidArgument, "need yaw_step > 0 and yaw_range >= yaw_step");
  }
}

double ProjectionImage::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

RigidTransform PlanarMotion::to_transform() const {
  return transform_from_components(yaw, 0.0, 0.0, {dx, dy, 0.0});
}

ProjectionImage make_image(const ProjectionCanvas& canvas) {
  canvas.validate();
  ProjectionImage image;
  image.canvas = canvas;
  image.values.assign(static_cast<std::size_t>(canvas.width) * canvas.height, 0.0);
  return image;
}

ProjectionImage project_to_image(const PointCloud& cloud, const ProjectionCanvas& canvas) {
  ProjectionImage image = make_image(canvas);
  const double sat = static_cast<double>(canvas.saturation);
  for (const auto& p : cloud.points) {
    const long col = canvas.center_col() + std::lround(p.x / canvas.resolution);
    const long row = canvas.center_row() - std::lround(p.y / canvas.resolution);
    if (col < 0 || col >= canvas.width || row < 0 || row >= canvas.height) continue;
    double& v = image.at(static_cast<int>(row), static_cast<int>(col));
    if (canvas.value_mode == ValueMode::kCount) {
      v = std::min(v + 1.0, sat);
    } else {
      v = std::max(v, p.intensity);
    }
    ++image.point_count_used;
  }
  return image;
}

PixelShift phase_correlate(const ProjectionImage& a, const ProjectionImage& b,
                           const CorrelationOptions& options) {
  check_same_size(a, b);
  Correlator correlator(b, options);
  return correlator.correlate(a);
}

ProjectionImage rotate_image(const ProjectionImage& image, double yaw) {
  ProjectionImage out;
  out.canvas = image.canvas;
  out.point_count_used = image.point_count_used;
  out.values.assign(image.values.size(), 0.0);
  rotate_values(image.values.data(), image.canvas, yaw, out.values.data());
  return out;
}

ProjectionImage circular_shift(const ProjectionImage& image, int dx_px, int dy_px) {
  ProjectionImage out = image;
  const int w = image.canvas.width;
  const int h = image.canvas.height;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int rr = ((r + dy_px) % h + h) % h;
      const int cc = ((c + dx_px) % w + w) % w;
      out.values[rr * w + cc] = image.values[r * w + c];
    }
  }
  return out;
}

namespace {

// Visits yaw = k * step for k = 0, -1, +1, -2, +2, ... so that strict
// improvement keeps the smallest |yaw| on ties. `load(yaw, input)` writes the
// windowed source for one candidate into the FFT input.
template <typename Loader>
PlanarMotion sweep(Correlator& correlator, const ProjectionCanvas& canvas, double yaw_range,
                   double yaw_step, Loader&& load) {
  const int steps = static_cast<int>(std::floor(yaw_range / yaw_step + 1e-9));
  PlanarMotion best;
  best.score = -1.0;
  PixelShift best_shift;
  for (int i = 0; i <= 2 * steps; ++i) {
    const int k = (i % 2 == 1) ? -(i + 1) / 2 : i / 2;
    const double yaw = k * yaw_step;
    load(yaw, correlator.input());
    const PixelShift shift = correlator.correlate_loaded();
    if (shift.peak > best.score) {
      best.score = shift.peak;
      best.yaw = yaw;
      best_shift = shift;
    }
  }
  best.score = std::clamp(best.score, 0.0, 1.0);
  best.dx = best_shift.dx_px * canvas.resolution;
  best.dy = -best_shift.dy_px * canvas.resolution;
  return best;
}

void check_search_range(double yaw_range, double yaw_step) {
  if (!(yaw_step > 0.0) || !(yaw_range >= yaw_step)) {
    throw Error(ErrorCode::kInvalidArgument, "need yaw_step > 0 and yaw_range >= yaw_step");
  }
}

}  // namespace

PlanarMotion rotation_search(const ProjectionImage& a, const ProjectionImage& b,
                             double yaw_range, double yaw_step,
                             const CorrelationOptions& options, PlanarTiming* timing) {
  check_same_size(a, b);
  check_search_range(yaw_range, yaw_step);
  const auto start = std::chrono::steady_clock::now();
  Correlator correlator(b, options);
  // Windowing before rotating lets each candidate go straight into the FFT input.
  const std::vector<double> source = correlator.windowed(a);
  PlanarMotion best = sweep(correlator, a.canvas, yaw_range, yaw_step,
                            [&](double yaw, std::span<double> in) {
                              if (yaw == 0.0) {
                                std::copy(source.begin(), source.end(), in.begin());
                              } else {
                                rotate_values(source.data(), a.canvas, yaw, in.data());
                              }
                            });
  if (timing) timing->rotate_correlate = seconds_since(start);
  return best;
}

PlanarMotion rotation_search(const PointCloud& source, const ProjectionImage& b,
                             double yaw_range, double yaw_step,
                             const CorrelationOptions& options, PlanarTiming* timing) {
  b.canvas.validate();
  check_search_range(yaw_range, yaw_step);
  const auto start = std::chrono::steady_clock::now();
  Correlator correlator(b, options);
  const ProjectionCanvas& canvas = b.canvas;
  const double inv_res = 1.0 / canvas.resolution;
  // Skip points that cannot land on the canvas at any yaw.
  const double reach = 0.5 * std::hypot(canvas.width + 2.0, canvas.height + 2.0) * canvas.resolution;
  std::vector<Point3> pts;
  pts.reserve(source.size());
  for (const auto& p : source.points) {
    if (p.x * p.x + p.y * p.y <= reach * reach) pts.push_back(p);
  }
  ProjectionImage scratch = make_image(canvas);
  const double sat = static_cast<double>(canvas.saturation);
  const bool count = canvas.value_mode == ValueMode::kCount;

  PlanarMotion best = sweep(correlator, canvas, yaw_range, yaw_step,
                            [&](double yaw, std::span<double> in) {
                              std::fill(scratch.values.begin(), scratch.values.end(), 0.0);
                              const double c = std::cos(yaw), s = std::sin(yaw);
                              for (const auto& p : pts) {
                                const double x = yaw == 0.0 ? p.x : c * p.x - s * p.y;
                                const double y = yaw == 0.0 ? p.y : s * p.x + c * p.y;
                                const long col = canvas.center_col() + std::lround(x * inv_res);
                                const long row = canvas.center_row() - std::lround(y * inv_res);
                                if (col < 0 || col >= canvas.width || row < 0 || row >= canvas.height) {
                                  continue;
                                }
                                double& v = scratch.at(static_cast<int>(row), static_cast<int>(col));
                                v = count ? std::min(v + 1.0, sat) : std::max(v, p.intensity);
                              }
                              const std::vector<double> w = correlator.windowed(scratch);
                              std::copy(w.begin(), w.end(), in.begin());
                            });
  if (timing) timing->rotate_correlate = seconds_since(start);
  return best;
}

PlanarMotion match_planar(const PointCloud& source, const PointCloud& target,
                          const PlanarConfig& cfg, const PreprocessConfig& pre_cfg,
                          PlanarTiming* timing) {
  cfg.validate();
  pre_cfg.validate();
  if (anomaly_gate(source.size(), target.size(), pre_cfg.anomaly_ratio) ==
      GateVerdict::kReject) {
    throw Error(ErrorCode::kAnomalousScan,
                "point count jumped from " + std::to_string(source.size()) + " to " +
                    std::to_string(target.size()));
  }
  const auto start = std::chrono::steady_clock::now();
  const PointCloud a = crop_range(source, pre_cfg);
  const ProjectionImage b = project_to_image(crop_range(target, pre_cfg), cfg.canvas);
  PlanarTiming local;
  PlanarTiming& tm = timing ? *timing : local;
  tm.project = seconds_since(start);
  const PlanarMotion motion =
      rotation_search(a, b, cfg.yaw_range, cfg.yaw_step, {true, cfg.subpixel}, &tm);
  if (motion.score < cfg.min_peak) throw LowConfidenceError(motion.score);
  return motion;
}

void write_pgm(std::ostream& out, const ProjectionImage& image) {
  const auto& cv = image.canvas;
  const bool count = cv.value_mode == ValueMode::kCount;
  const int maxval = count ? cv.saturation : 255;
  out << "P2\n" << cv.width << ' ' << cv.height << '\n' << maxval << '\n';
  for (int r = 0; r < cv.height; ++r) {
    for (int c = 0; c < cv.width; ++c) {
      const double v = image.at(r, c);
      const long px = count ? std::lround(v) : std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
      if (c) out << ' ';
      out << std::clamp<long>(px, 0, maxval);
    }
    out << '\n';
  }
}

}  // namespace lidarnav

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Real 2-D FFT pair on FFTW with owned buffers. Plan creation is serialized
// because FFTW's planner is not thread-safe; execution is.

#ifndef LIDARNAV_SRC_FFT2D_HPP_
#define LIDARNAV_SRC_FFT2D_HPP_

#include <complex>
#include <span>

#include <fftw3.h>

namespace lidarnav::detail {

class Fft2d {
 public:
  Fft2d(int rows, int cols);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int spectrum_cols() const { return cols_ / 2 + 1; }

  std::span<double> real() { return {real_, static_cast<std::size_t>(rows_ * cols_)}; }
  std::span<std::complex<double>> spectrum() {
    return {reinterpret_cast<std::complex<double>*>(spectrum_),
            static_cast<std::size_t>(rows_ * spectrum_cols())};
  }

  void forward() { fftw_execute(forward_); }   // real() -> spectrum()
  void inverse() { fftw_execute(inverse_); }   // spectrum() -> real(), unscaled

 private:
  int rows_;
  int cols_;
  double* real_ = nullptr;
  fftw_complex* spectrum_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace lidarnav::detail

#endif  // LIDARNAV_SRC_FFT2D_HPP_

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "fft2d.hpp"

#include <mutex>
#include <new>

namespace lidarnav::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2d::Fft2d(int rows, int cols) : rows_(rows), cols_(cols) {
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(static_cast<std::size_t>(rows) * cols);
  spectrum_ = fftw_alloc_complex(static_cast<std::size_t>(rows) * (cols / 2 + 1));
  if (!real_ || !spectrum_) {
    fftw_free(real_);
    fftw_free(spectrum_);
    throw std::bad_alloc();
  }
  forward_ = fftw_plan_dft_r2c_2d(rows, cols, real_, spectrum_, FFTW_ESTIMATE);
  // c2r destroys its input unless told otherwise; spectra are scratch here.
  inverse_ = fftw_plan_dft_c2r_2d(rows, cols, spectrum_, real_, FFTW_ESTIMATE);
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(inverse_);
  fftw_free(real_);
  fftw_free(spectrum_);
}

}  // namespace lidarnav::detail

// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small shared helpers for the test suites.

#ifndef LIDARNAV_TESTS_TEST_UTIL_HPP_
#define LIDARNAV_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <string>

#include "lidarnav/geometry.hpp"
#include "lidarnav/random.hpp"

namespace lidarnav::test {

inline PointCloud random_cloud(Rng& rng, std::size_t n, double extent) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({uniform(rng, -extent, extent), uniform(rng, -extent, extent),
                        uniform(rng, -extent, extent), uniform01(rng)});
  }
  return c;
}

inline RigidTransform random_transform(Rng& rng, double max_angle, double max_shift) {
  return transform_from_components(
      uniform(rng, -max_angle, max_angle), uniform(rng, -max_angle, max_angle),
      uniform(rng, -max_angle, max_angle),
      {uniform(rng, -max_shift, max_shift), uniform(rng, -max_shift, max_shift),
       uniform(rng, -max_shift, max_shift)});
}

inline double rotation_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.rotation - b.rotation).norm();
}

inline double translation_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation - b.translation).norm();
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lidarnav_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lidarnav::test

#endif  // LIDARNAV_TESTS_TEST_UTIL_HPP_

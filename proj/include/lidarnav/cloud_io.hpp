// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// ASCII point cloud files:
//
//   CLOUD v1 <count> <stamp_seconds>
//   x y z intensity
//   ...
//
// Values are written with 9 significant digits. Readers reject a header
// count that does not match the number of point lines.

#ifndef LIDARNAV_CLOUD_IO_HPP_
#define LIDARNAV_CLOUD_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lidarnav/geometry.hpp"

namespace lidarnav {

void write_cloud(std::ostream& out, const PointCloud& cloud);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// `source_name` is used only in FormatError messages.
PointCloud read_cloud(std::istream& in, const std::string& source_name);
PointCloud read_cloud(const std::filesystem::path& path);

/// Shortest-safe fixed formatting shared by every text writer in the project.
std::string format_double(double value, int significant_digits = 9);

}  // namespace lidarnav

#endif  // LIDARNAV_CLOUD_IO_HPP_

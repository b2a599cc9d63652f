// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/cloud_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

std::string_view next_token(std::string_view& line) {
  std::size_t start = line.find_first_not_of(" \t\r");
  if (start == std::string_view::npos) {
    line = {};
    return {};
  }
  std::size_t end = line.find_first_of(" \t\r", start);
  if (end == std::string_view::npos) end = line.size();
  std::string_view token = line.substr(start, end - start);
  line.remove_prefix(end);
  return token;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

}  // namespace

std::string format_double(double value, int significant_digits) {
  if (value == 0.0) value = 0.0;  // fold -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  out << "CLOUD v1 " << cloud.size() << ' ' << format_double(cloud.stamp, 17) << '\n';
  char buf[160];
  for (const auto& p : cloud.points) {
    const int n = std::snprintf(buf, sizeof(buf), "%#.9g %#.9g %#.9g %#.9g\n",
                                p.x, p.y, p.z, p.intensity);
    out.write(buf, n);
  }
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string(), 0, "cannot open for writing");
  write_cloud(out, cloud);
  if (!out) throw FormatError(path.string(), 0, "write failed");
}

PointCloud read_cloud(std::istream& in, const std::string& source_name) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) {
    throw FormatError(source_name, line_no, "missing CLOUD header");
  }
  std::string_view header(line);
  std::size_t count = 0;
  PointCloud cloud;
  if (next_token(header) != "CLOUD" || next_token(header) != "v1" ||
      !parse_number(next_token(header), count) ||
      !parse_number(next_token(header), cloud.stamp) || !next_token(header).empty()) {
    throw FormatError(source_name, line_no, "expected 'CLOUD v1 <count> <stamp>'");
  }
  if (!std::isfinite(cloud.stamp) || cloud.stamp < 0.0) {
    throw FormatError(source_name, line_no, "stamp must be finite and >= 0");
  }
  cloud.points.reserve(count);
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (rest.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Point3 p;
    if (!parse_number(next_token(rest), p.x) || !parse_number(next_token(rest), p.y) ||
        !parse_number(next_token(rest), p.z) ||
        !parse_number(next_token(rest), p.intensity) || !next_token(rest).empty()) {
      throw FormatError(source_name, line_no, "expected 'x y z intensity'");
    }
    if (!p.is_valid()) {
      throw FormatError(source_name, line_no,
                        "non-finite coordinate or intensity outside [0,1]");
    }
    if (cloud.points.size() == count) {
      throw FormatError(source_name, line_no,
                        "more points than header count " + std::to_string(count));
    }
    cloud.points.push_back(p);
  }
  if (cloud.points.size() != count) {
    throw FormatError(source_name, line_no,
                      "header count " + std::to_string(count) + " but " +
                          std::to_string(cloud.points.size()) + " points");
  }
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), 0, "cannot open");
  return read_cloud(in, path.string());
}

}  // namespace lidarnav

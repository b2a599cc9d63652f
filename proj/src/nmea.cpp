// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0

#include "lidarnav/nmea.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "lidarnav/error.hpp"

namespace lidarnav {

namespace {

enum Field {
  kType = 0,
  kTime = 1,
  kLat = 2,
  kLatHemi = 3,
  kLon = 4,
  kLonHemi = 5,
  kQuality = 6,
  kSatellites = 7,
  kHdop = 8,
  kAltitude = 9,
};

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

double parse_double(std::string_view s, int index) {
  double v = 0.0;
  if (s.empty()) throw MalformedFieldError(index, "empty");
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw MalformedFieldError(index, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, int index) {
  int v = 0;
  if (s.empty()) throw MalformedFieldError(index, "empty");
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw MalformedFieldError(index, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

// ddmm.mmmm / dddmm.mmmm with a hemisphere letter.
double parse_angle(std::string_view value, std::string_view hemi, int index,
                   int degree_digits, char positive, char negative, double limit) {
  const std::size_t dot = value.find('.');
  const std::size_t int_len = dot == std::string_view::npos ? value.size() : dot;
  if (int_len != static_cast<std::size_t>(degree_digits + 2)) {
    throw MalformedFieldError(index, "expected " + std::to_string(degree_digits) +
                                         " degree digits in '" + std::string(value) + "'");
  }
  const int degrees = parse_int(value.substr(0, degree_digits), index);
  const double minutes = parse_double(value.substr(degree_digits), index);
  if (minutes < 0.0 || minutes >= 60.0) throw MalformedFieldError(index, "minutes out of range");
  double angle = degrees + minutes / 60.0;
  if (angle > limit) throw MalformedFieldError(index, "angle out of range");
  if (hemi.size() != 1 || (hemi[0] != positive && hemi[0] != negative)) {
    throw MalformedFieldError(index + 1, "bad hemisphere '" + std::string(hemi) + "'");
  }
  return hemi[0] == negative ? -angle : angle;
}

}  // namespace

std::uint8_t nmea_checksum(std::string_view payload) {
  std::uint8_t sum = 0;
  for (char c : payload) sum ^= static_cast<std::uint8_t>(c);
  return sum;
}

GpsFix parse_nmea_gga(std::string_view sentence) {
  while (!sentence.empty() && (sentence.back() == '\r' || sentence.back() == '\n' ||
                               sentence.back() == ' ')) {
    sentence.remove_suffix(1);
  }
  if (sentence.empty() || sentence.front() != '$') {
    throw Error(ErrorCode::kBadChecksum, "sentence does not start with '$'");
  }
  const std::size_t star = sentence.rfind('*');
  if (star == std::string_view::npos || star + 3 != sentence.size()) {
    throw Error(ErrorCode::kBadChecksum, "missing '*hh' checksum");
  }
  const int hi = hex_value(sentence[star + 1]);
  const int lo = hex_value(sentence[star + 2]);
  const std::string_view payload = sentence.substr(1, star - 1);
  if (hi < 0 || lo < 0 || nmea_checksum(payload) != hi * 16 + lo) {
    throw Error(ErrorCode::kBadChecksum, "checksum mismatch");
  }

  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = payload.find(',', start);
    fields.push_back(payload.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  const std::string_view type = fields[kType];
  if (type.size() != 5 || type.substr(2) != "GGA") {
    throw Error(ErrorCode::kNotGga, "sentence type '" + std::string(type) + "'");
  }
  if (fields.size() <= kAltitude) {
    throw MalformedFieldError(static_cast<int>(fields.size()), "too few fields");
  }

  GpsFix fix;
  fix.fix_quality = parse_int(fields[kQuality], kQuality);
  if (fix.fix_quality < 0 || fix.fix_quality > 8) {
    throw MalformedFieldError(kQuality, "fix quality out of range");
  }

  const std::string_view time = fields[kTime];
  if (time.size() < 6) throw MalformedFieldError(kTime, "expected hhmmss");
  const int hh = parse_int(time.substr(0, 2), kTime);
  const int mm = parse_int(time.substr(2, 2), kTime);
  const double ss = parse_double(time.substr(4), kTime);
  if (hh > 23 || mm > 59 || ss < 0.0 || ss >= 61.0) {
    throw MalformedFieldError(kTime, "time out of range");
  }
  fix.time_of_day = hh * 3600.0 + mm * 60.0 + ss;

  const bool no_fix = fix.fix_quality == 0;
  const auto optional_empty = [&](int index) { return no_fix && fields[index].empty(); };
  if (!(optional_empty(kLat) && optional_empty(kLatHemi))) {
    fix.latitude = parse_angle(fields[kLat], fields[kLatHemi], kLat, 2, 'N', 'S', 90.0);
  }
  if (!(optional_empty(kLon) && optional_empty(kLonHemi))) {
    fix.longitude = parse_angle(fields[kLon], fields[kLonHemi], kLon, 3, 'E', 'W', 180.0);
  }
  if (!optional_empty(kSatellites)) {
    fix.satellites = parse_int(fields[kSatellites], kSatellites);
    if (fix.satellites < 0) throw MalformedFieldError(kSatellites, "negative");
  }
  if (!optional_empty(kHdop)) {
    fix.hdop = parse_double(fields[kHdop], kHdop);
    if (fix.hdop < 0.0) throw MalformedFieldError(kHdop, "negative HDOP");
  }
  if (!optional_empty(kAltitude)) fix.altitude = parse_double(fields[kAltitude], kAltitude);
  return fix;
}

std::string format_nmea_gga(const GpsFix& fix, std::string_view talker) {
  const long long centis = std::llround(fix.time_of_day * 100.0);
  const long long day = 24LL * 3600 * 100;
  const long long t = ((centis % day) + day) % day;
  const int hh = static_cast<int>(t / 360000);
  const int mm = static_cast<int>(t / 6000 % 60);
  const double ss = static_cast<double>(t % 6000) / 100.0;

  // Minutes in units of 1e-7 so rounding carries into whole degrees.
  const auto split = [](double angle, long long& deg, double& minutes) {
    const long long units = std::llround(std::abs(angle) * 60.0 * 1e7);
    deg = units / 600000000LL;
    minutes = static_cast<double>(units % 600000000LL) / 1e7;
  };
  long long lat_deg, lon_deg;
  double lat_min, lon_min;
  split(fix.latitude, lat_deg, lat_min);
  split(fix.longitude, lon_deg, lon_min);

  char body[160];
  std::snprintf(body, sizeof(body),
                "%.2sGGA,%02d%02d%05.2f,%02lld%010.7f,%c,%03lld%010.7f,%c,%d,%02d,%.2f,%.2f,M,0.0,M,,",
                std::string(talker).c_str(), hh, mm, ss, lat_deg, lat_min,
                fix.latitude < 0 ? 'S' : 'N', lon_deg, lon_min,
                fix.longitude < 0 ? 'W' : 'E', fix.fix_quality, fix.satellites, fix.hdop,
                fix.altitude);
  char out[176];
  std::snprintf(out, sizeof(out), "$%s*%02X", body, nmea_checksum(body));
  return out;
}

}  // namespace lidarnav

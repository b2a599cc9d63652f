// Copyright 2026 The lidarnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// NMEA 0183 GGA sentences.

#ifndef LIDARNAV_NMEA_HPP_
#define LIDARNAV_NMEA_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace lidarnav {

struct GpsFix {
  double time_of_day = 0.0;  // seconds since UTC midnight
  double latitude = 0.0;     // deg, WGS-84, north positive
  double longitude = 0.0;    // deg, east positive
  int fix_quality = 0;       // 0 = no fix
  int satellites = 0;
  double hdop = 0.0;
  double altitude = 0.0;  // m above mean sea level
};

/// XOR of every byte between '$' and '*'.
std::uint8_t nmea_checksum(std::string_view payload);

/// Any talker (GP, GN, ...) is accepted. With fix quality 0 the position,
/// HDOP and altitude fields may be empty and read as 0. Throws
/// kBadChecksum, kNotGga or MalformedFieldError.
GpsFix parse_nmea_gga(std::string_view sentence);

/// Inverse of parse_nmea_gga: minutes carry 7 decimals (< 1 mm), time two.
std::string format_nmea_gga(const GpsFix& fix, std::string_view talker = "GP");

}  // namespace lidarnav

#endif  // LIDARNAV_NMEA_HPP_

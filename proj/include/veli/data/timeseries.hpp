#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "veli/matrix.hpp"

namespace veli::data {

/// Hours since 1970-01-01T00:00Z.
using HourIndex = std::int64_t;

/// Parses ISO-8601 UTC such as `2024-03-01T13:00:00Z`, `2024-03-01 13:05`,
/// or `2024-03-01T13`. Returns seconds since the Unix epoch. Throws DataError.
std::int64_t parse_timestamp(const std::string& text);
/// `YYYY-MM-DDTHH:00:00Z`
std::string format_hour(HourIndex hour);
HourIndex hour_of(std::int64_t unix_seconds) noexcept;

struct RawSample {
  std::int64_t unix_seconds = 0;
  double value = kNA;
};

/// Readings at arbitrary frequency with strictly increasing timestamps.
struct RawSeries {
  std::string sensor_id;
  std::vector<RawSample> samples;

  /// Throws DataError if timestamps are not strictly increasing.
  void validate() const;
};

/// Values on a gap-free hourly grid; missing hours hold NA.
struct HourlySeries {
  std::string sensor_id;
  HourIndex start_hour = 0;
  std::vector<double> values;

  HourIndex end_hour() const noexcept { return start_hour + static_cast<HourIndex>(values.size()); }
  std::size_t observed_count() const noexcept;
  /// Value at an absolute hour, NA outside the series.
  double at(HourIndex hour) const noexcept;

  friend bool operator==(const HourlySeries& a, const HourlySeries& b);
};

/// d aligned sensor series plus an optional aligned reference.
struct LocationDataset {
  std::string id;
  HourIndex start_hour = 0;
  std::vector<std::string> sensor_ids;
  Matrix readings;                 // T x d, NA = NaN
  std::vector<double> reference;   // empty or length T, NA = NaN

  std::size_t hours() const noexcept { return readings.rows(); }
  std::size_t sensors() const noexcept { return readings.cols(); }
  bool has_reference() const noexcept { return !reference.empty(); }
  /// psi: 1 where a reading is present, 0 where it is NA.
  Matrix mask() const;

  /// Rows [begin, end) as a new dataset.
  LocationDataset slice(std::size_t begin, std::size_t end) const;
  /// Keeps only the listed channels, in the given order.
  LocationDataset select_channels(const std::vector<std::size_t>& channels) const;
};

}  // namespace veli::data

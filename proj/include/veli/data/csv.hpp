#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "veli/data/timeseries.hpp"

namespace veli::data {

/// Per-channel corrected readings and their one-standard-deviation widths.
struct Corrections {
  Matrix y_hat;  // T x d
  Matrix y_std;  // T x d
};

struct LocationCsv {
  LocationDataset location;
  std::optional<Corrections> corrections;
};

/// Header `timestamp,<sensor>...[,ref][,yhat_1..d,ystd_1..d]`. Empty cells are
/// NA. Hours missing between rows become NA rows; rows must be strictly
/// increasing. Throws DataError with the line number on malformed input.
LocationCsv parse_location_csv(std::string_view text, std::string id = "location");
LocationCsv read_location_csv(const std::filesystem::path& path);

std::string format_location_csv(const LocationDataset& location,
                                const Corrections* corrections = nullptr);
void write_location_csv(const std::filesystem::path& path, const LocationDataset& location,
                        const Corrections* corrections = nullptr);

/// Single raw sensor stream, header `timestamp,value`.
RawSeries parse_raw_csv(std::string_view text, std::string sensor_id);
RawSeries read_raw_csv(const std::filesystem::path& path, std::string sensor_id = {});

/// Shortest decimal that round-trips; NA prints as an empty cell.
std::string format_value(double v);

}  // namespace veli::data

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "veli/data/timeseries.hpp"
#include "veli/parallel.hpp"

namespace veli::data {

/// Mean of the samples in each hour [h, h+1). The grid spans the first to the
/// last sample; empty input gives an empty series.
HourlySeries resample_hourly(const RawSeries& raw);
/// Same, on the fixed grid [start_hour, end_hour). Samples outside are ignored.
HourlySeries resample_hourly(const RawSeries& raw, HourIndex start_hour, HourIndex end_hour);
/// Inverse view: one sample per observed hour, stamped at the hour start.
RawSeries to_raw(const HourlySeries& series);

struct Bounds {
  double lo = 0.0;
  double hi = 1000.0;

  static Bounds pm25() noexcept { return {0.0, 1000.0}; }
  static Bounds temperature() noexcept { return {-50.0, 70.0}; }
  void validate() const;
};

/// Values outside the closed interval [lo, hi] become NA.
HourlySeries range_validate(const HourlySeries& series, const Bounds& bounds);

struct DbscanConfig {
  double eps = 0.0;                // 0 selects eps_mad_multiplier * MAD per batch
  double eps_mad_multiplier = 5.0;
  std::size_t min_pts = 24;
  std::size_t batch_hours = 1460;
  /// Clusters smaller than this fraction of the batch's largest cluster are
  /// scrubbed together with noise points. 0 keeps every cluster.
  double keep_cluster_ratio = 0.5;

  void validate() const;
};

/// Per-batch 1-D DBSCAN over observed values; scrubbed points become NA.
/// Batches with fewer than min_pts observed values pass through unchanged.
HourlySeries dbscan_scrub(const HourlySeries& series, const DbscanConfig& cfg);

struct PreprocessConfig {
  Bounds bounds = Bounds::pm25();
  DbscanConfig dbscan;
  bool scrub = true;
};

/// resample -> range_validate -> dbscan_scrub for every sensor. Sensors are
/// independent, so the parallel path returns the same result as the serial one.
std::vector<HourlySeries> preprocess_sensors(const std::vector<RawSeries>& raw,
                                             const PreprocessConfig& cfg,
                                             Execution exec = Execution::kParallel);

/// Aligns sensors on the union hourly grid; the reference is the per-hour mean
/// of the non-NA reference values (NA if none). Throws DataError without sensors.
LocationDataset build_location(const std::vector<HourlySeries>& sensors,
                               const std::vector<HourlySeries>& refs, std::string id = "location");

struct EligibilityConfig {
  std::size_t min_hours = 6000;
  std::size_t min_sensors = 1;
};

/// Drops sensors with fewer than min_hours observed values. Throws DataError
/// with the per-sensor counts if fewer than min_sensors remain.
LocationDataset eligibility_filter(const LocationDataset& location, const EligibilityConfig& cfg);

/// Chronological split: the first floor(fraction * T) hours train, the rest test.
struct Split {
  LocationDataset train;
  LocationDataset test;
};
Split chronological_split(const LocationDataset& location, double train_fraction);

}  // namespace veli::data

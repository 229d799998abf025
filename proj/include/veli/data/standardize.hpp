#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "veli/matrix.hpp"
#include "veli/model/snapshot.hpp"

namespace veli::data {

inline constexpr double kScaleFloor = 1e-6;

/// Per-channel z-score statistics over observed entries.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> scale;  // sample standard deviation, floored at kScaleFloor

  std::size_t size() const noexcept { return mean.size(); }
  static ChannelStats identity(std::size_t channels);

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

/// Fits statistics on a T x d reading matrix (NA = NaN). Throws DataError if a
/// channel has fewer than two observed values.
ChannelStats standardize_fit(const Matrix& readings);

/// (x - mean) / scale on observed cells; NA cells become 0.
Matrix standardize_apply(const Matrix& readings, const ChannelStats& stats);

double destandardize(double z, const ChannelStats& stats, std::size_t channel);
std::vector<double> destandardize(std::span<const double> z, const ChannelStats& stats);

/// Builds a model input from one raw row. Channels with mask 0 are zero-filled
/// regardless of the raw value stored there.
model::SensorSnapshot make_snapshot(std::span<const double> raw_row, std::span<const double> mask_row,
                                    const ChannelStats& stats, std::int64_t hour = 0);

/// One snapshot per row, mask derived from NA cells.
std::vector<model::SensorSnapshot> make_snapshots(const Matrix& readings, const ChannelStats& stats,
                                                  std::int64_t start_hour = 0);

}  // namespace veli::data

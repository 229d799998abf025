#include "veli/data/standardize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "veli/error.hpp"

namespace veli::data {

ChannelStats ChannelStats::identity(std::size_t channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

ChannelStats standardize_fit(const Matrix& readings) {
  ChannelStats stats;
  stats.mean.resize(readings.cols());
  stats.scale.resize(readings.cols());
  for (std::size_t c = 0; c < readings.cols(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < readings.rows(); ++r) {
      const double v = readings(r, c);
      if (is_na(v)) continue;
      sum += v;
      ++n;
    }
    if (n < 2)
      throw DataError("channel " + std::to_string(c) + " has " + std::to_string(n) +
                      " observed values; at least 2 are needed to standardize");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < readings.rows(); ++r) {
      const double v = readings(r, c);
      if (!is_na(v)) ss += (v - mean) * (v - mean);
    }
    stats.mean[c] = mean;
    stats.scale[c] = std::max(std::sqrt(ss / static_cast<double>(n - 1)), kScaleFloor);
  }
  return stats;
}

Matrix standardize_apply(const Matrix& readings, const ChannelStats& stats) {
  if (readings.cols() != stats.size()) throw DimensionError("standardization channels", stats.size(), readings.cols());
  Matrix out(readings.rows(), readings.cols(), 0.0);
  for (std::size_t r = 0; r < readings.rows(); ++r)
    for (std::size_t c = 0; c < readings.cols(); ++c) {
      const double v = readings(r, c);
      out(r, c) = is_na(v) ? 0.0 : (v - stats.mean[c]) / stats.scale[c];
    }
  return out;
}

double destandardize(double z, const ChannelStats& stats, std::size_t channel) {
  return stats.mean.at(channel) + stats.scale.at(channel) * z;
}

std::vector<double> destandardize(std::span<const double> z, const ChannelStats& stats) {
  if (z.size() != stats.size()) throw DimensionError("destandardize channels", stats.size(), z.size());
  std::vector<double> out(z.size());
  for (std::size_t c = 0; c < z.size(); ++c) out[c] = stats.mean[c] + stats.scale[c] * z[c];
  return out;
}

model::SensorSnapshot make_snapshot(std::span<const double> raw_row, std::span<const double> mask_row,
                                    const ChannelStats& stats, std::int64_t hour) {
  const auto d = stats.size();
  if (raw_row.size() != d) throw DimensionError("snapshot readings", d, raw_row.size());
  if (mask_row.size() != d) throw DimensionError("snapshot mask", d, mask_row.size());
  model::SensorSnapshot snap;
  snap.hour = hour;
  snap.x.assign(d, 0.0);
  snap.mask.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    if (mask_row[c] == 0.0) continue;
    if (is_na(raw_row[c])) throw DataError("observed channel " + std::to_string(c) + " holds NA");
    snap.mask[c] = 1.0;
    snap.x[c] = (raw_row[c] - stats.mean[c]) / stats.scale[c];
  }
  return snap;
}

std::vector<model::SensorSnapshot> make_snapshots(const Matrix& readings, const ChannelStats& stats,
                                                  std::int64_t start_hour) {
  std::vector<model::SensorSnapshot> out;
  out.reserve(readings.rows());
  std::vector<double> mask(readings.cols());
  for (std::size_t r = 0; r < readings.rows(); ++r) {
    const auto row = readings.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) mask[c] = is_na(row[c]) ? 0.0 : 1.0;
    out.push_back(make_snapshot(row, mask, stats, start_hour + static_cast<std::int64_t>(r)));
  }
  return out;
}

}  // namespace veli::data

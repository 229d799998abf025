#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace veli::eval {

/// Mean |pred - ref| over hours where both are observed. Throws DataError when
/// no hour is co-observed, DimensionError on a length mismatch.
double mae(std::span<const double> pred, std::span<const double> ref);

struct HitRatePoint {
  double epsilon = 0.0;
  double fraction = 0.0;

  friend bool operator==(const HitRatePoint&, const HitRatePoint&) = default;
};

/// 0, 0.25, ..., 25.
std::vector<double> default_epsilon_grid();

/// Fraction of co-observed hours with |pred - ref| <= epsilon, per epsilon.
std::vector<HitRatePoint> hit_rate_curve(std::span<const double> pred, std::span<const double> ref,
                                         std::span<const double> epsilons);

/// Pearson correlation of (x_t, x_{t+l}) for l = 1..max_lag, using only pairs
/// where both values are observed. Lags with fewer than two pairs or a
/// constant side give 0. Throws DataError("constant series") if the observed
/// values have zero variance.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag = 48);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};
MeanStd mean_std(std::span<const double> values);

/// Row mean over observed channels; NA where a row has none.
std::vector<double> row_mean(std::span<const double> row_major, std::size_t cols);

/// Least-squares non-decreasing fit (pool adjacent violators).
std::vector<double> isotonic_increasing(std::span<const double> values);

/// Number of adjacent pairs with values[i + 1] < values[i].
std::size_t count_descents(std::span<const double> values);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
/// Freedman-Diaconis bin width over observed values; a single bin when the
/// interquartile range is zero.
std::vector<HistogramBin> histogram(std::span<const double> values);

/// Means of consecutive blocks of `block` hours ignoring NA (NA if a block has none).
std::vector<double> block_average(std::span<const double> series, std::size_t block);

}  // namespace veli::eval

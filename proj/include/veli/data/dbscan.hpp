#pragma once

#include <span>
#include <vector>

namespace veli::data {

inline constexpr int kDbscanNoise = -1;

/// DBSCAN on scalar values. A point is core when at least min_pts values
/// (itself included) lie within eps of it. Returns one label per input:
/// a cluster id (0, 1, ... in increasing value order) or kDbscanNoise.
std::vector<int> dbscan_1d(std::span<const double> values, double eps, std::size_t min_pts);

/// Median absolute deviation from the median.
double median_absolute_deviation(std::span<const double> values);

}  // namespace veli::data

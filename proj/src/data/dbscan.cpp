#include "veli/data/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "veli/error.hpp"

namespace veli::data {

std::vector<int> dbscan_1d(std::span<const double> values, double eps, std::size_t min_pts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("dbscan eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be at least 1");
  const std::size_t n = values.size();
  std::vector<int> labels(n, kDbscanNoise);
  if (n == 0) return labels;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = values[order[i]];

  // Neighbourhood of sorted point i is the window [lo, hi).
  std::vector<char> core(n, 0);
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (v[i] - v[lo] > eps) ++lo;
    if (hi < i) hi = i;
    while (hi < n && v[hi] - v[i] <= eps) ++hi;
    core[i] = (hi - lo) >= min_pts ? 1 : 0;
  }

  // Consecutive core points within eps are density-connected.
  std::vector<int> sorted_label(n, kDbscanNoise);
  int cluster = -1;
  std::size_t last_core = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    if (last_core == n || v[i] - v[last_core] > eps) ++cluster;
    sorted_label[i] = cluster;
    last_core = i;
  }

  // Border points join the cluster of the nearest core point within eps.
  std::size_t prev = n;
  std::vector<std::size_t> next_core(n, n);
  for (std::size_t i = n; i-- > 0;) {
    next_core[i] = core[i] ? i : (i + 1 < n ? next_core[i + 1] : n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      prev = i;
      continue;
    }
    const double dl = prev != n ? v[i] - v[prev] : INFINITY;
    const double dr = next_core[i] != n ? v[next_core[i]] - v[i] : INFINITY;
    if (dl <= eps && dl <= dr) sorted_label[i] = sorted_label[prev];
    else if (dr <= eps) sorted_label[i] = sorted_label[next_core[i]];
  }

  for (std::size_t i = 0; i < n; ++i) labels[order[i]] = sorted_label[i];
  return labels;
}

double median_absolute_deviation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  auto median = [](std::vector<double> x) {
    const std::size_t m = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), x.end());
    double hi = x[m];
    if (x.size() % 2 == 1) return hi;
    const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
  };
  std::vector<double> x(values.begin(), values.end());
  const double med = median(x);
  for (double& e : x) e = std::abs(e - med);
  return median(std::move(x));
}

}  // namespace veli::data

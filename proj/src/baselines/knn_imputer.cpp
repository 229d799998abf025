#include "veli/baselines/knn_imputer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "veli/error.hpp"

namespace veli::baselines {

double masked_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (is_na(a[c]) || is_na(b[c])) continue;
    const double diff = a[c] - b[c];
    sum += diff * diff;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(a.size()) / static_cast<double>(n) * sum);
}

Matrix knn_impute(const Matrix& x, std::size_t k, Execution exec) {
  if (k == 0) throw ConfigError("knn.k must be positive");
  const std::size_t T = x.rows(), d = x.cols();
  std::vector<double> col_mean(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t n = 0;
    for (std::size_t t = 0; t < T; ++t)
      if (!is_na(x(t, c))) {
        col_mean[c] += x(t, c);
        ++n;
      }
    if (n == 0) throw DataError("knn_impute: column " + std::to_string(c) + " has no observed value");
    col_mean[c] /= static_cast<double>(n);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const auto r = x.row(t);
    if (std::all_of(r.begin(), r.end(), [](double v) { return is_na(v); }))
      throw DataError("knn_impute: row " + std::to_string(t) + " has no observed value");
  }

  Matrix out = x;
  auto fill_row = [&](std::size_t i, std::vector<std::pair<double, std::size_t>>& dist) {
    const auto ri = x.row(i);
    if (std::none_of(ri.begin(), ri.end(), [](double v) { return is_na(v); })) return;
    dist.clear();
    for (std::size_t j = 0; j < T; ++j) {
      if (j == i) continue;
      const double dj = masked_distance(ri, x.row(j));
      if (std::isfinite(dj)) dist.emplace_back(dj, j);
    }
    std::sort(dist.begin(), dist.end());
    for (std::size_t c = 0; c < d; ++c) {
      if (!is_na(ri[c])) continue;
      double sum = 0.0;
      std::size_t used = 0;
      for (const auto& [dj, j] : dist) {
        if (used == k) break;
        const double v = x(j, c);
        if (is_na(v)) continue;
        sum += v;
        ++used;
      }
      out(i, c) = used > 0 ? sum / static_cast<double>(used) : col_mean[c];
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(T);
  if (exec == Execution::kParallel) {
#pragma omp parallel
    {
      std::vector<std::pair<double, std::size_t>> dist;
#pragma omp for schedule(dynamic, 16)
      for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(static_cast<std::size_t>(i), dist);
    }
  } else {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::ptrdiff_t i = 0; i < n; ++i) fill_row(static_cast<std::size_t>(i), dist);
  }
  return out;
}

}  // namespace veli::baselines

#pragma once

#include <cstddef>

#include "veli/matrix.hpp"
#include "veli/parallel.hpp"

namespace veli::baselines {

/// Distance over co-observed columns, sqrt(d / n_co * sum (a - b)^2).
/// Infinite when no column is observed in both rows.
double masked_distance(std::span<const double> a, std::span<const double> b);

/// Fills each NA with the mean of that column over the k nearest rows that
/// observe it (ties broken by row index). A column with no donor falls back
/// to its observed mean. Observed entries are returned unchanged.
/// Throws DataError for an all-NA row or column.
Matrix knn_impute(const Matrix& x, std::size_t k = 5, Execution exec = Execution::kParallel);

}  // namespace veli::baselines

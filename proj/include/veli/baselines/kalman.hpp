#pragma once

#include <vector>

#include "veli/matrix.hpp"

namespace veli::baselines {

/// Scalar random walk x_t = x_{t-1} + w, w ~ N(0, q), observed by every
/// channel as z_t = x_t 1 + v, v ~ N(0, diag(r)).
struct KalmanConfig {
  double q = 0.01;
  std::vector<double> r;  // one per channel
  double initial_mean = 0.0;
  double initial_variance = 1.0;

  void validate(std::size_t channels) const;
};

/// q = 0.01 * variance of all entries, r = per-channel sample variance,
/// initial state = mean of the first row, with its sample variance (at least
/// q) as uncertainty. Every row, the first included, is a predict then update.
KalmanConfig default_kalman_config(const Matrix& x);

/// Posterior means of the fused state, one per row. Throws DataError on
/// non-finite input.
std::vector<double> kalman_denoise(const Matrix& x, const KalmanConfig& cfg);

}  // namespace veli::baselines

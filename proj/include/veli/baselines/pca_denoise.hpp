#pragma once

#include <cstddef>
#include <vector>

#include "veli/matrix.hpp"

namespace veli::baselines {

/// Either a fixed component count or a retained-variance fraction.
struct PcaConfig {
  std::size_t components = 0;      // 0 = use variance_fraction
  double variance_fraction = 0.9;  // ignored when components > 0

  void validate(std::size_t channels) const;
};

struct PcaResult {
  Matrix reconstruction;            // T x d
  std::vector<double> fused;        // row means of the reconstruction
  std::size_t components = 0;
  std::vector<double> eigenvalues;  // covariance spectrum, descending
};

/// Centers columns, projects onto the leading principal components and maps
/// back. Requires T > d and no NA.
PcaResult pca_denoise(const Matrix& x, const PcaConfig& cfg);

}  // namespace veli::baselines

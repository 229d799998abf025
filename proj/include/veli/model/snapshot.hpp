#pragma once

#include <cstdint>
#include <vector>

namespace veli::model {

/// One hourly vector of standardized readings and its observation mask.
/// Masked entries (mask 0) are zero-filled.
struct SensorSnapshot {
  std::vector<double> x;
  std::vector<double> mask;
  std::int64_t hour = 0;  // hours since 1970-01-01T00:00Z

  std::size_t size() const noexcept { return x.size(); }
  std::size_t observed() const noexcept {
    std::size_t n = 0;
    for (double m : mask) n += m != 0.0 ? 1 : 0;
    return n;
  }

  friend bool operator==(const SensorSnapshot&, const SensorSnapshot&) = default;
};

}  // namespace veli::model

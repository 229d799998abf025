#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "veli/data/timeseries.hpp"
#include "veli/matrix.hpp"
#include "veli/parallel.hpp"

namespace veli::synth {

enum class BaseKind { kReferenceFile, kSinusoid, kSawtooth, kExponential };

std::string to_string(BaseKind k);
BaseKind base_kind_from_string(const std::string& name);

struct BaseSignalSpec {
  BaseKind kind = BaseKind::kSinusoid;
  double offset = 2.0;
  double max_value = 30.0;
  double period = 48.0;       // hours
  double rate = 1.0 / 12.0;   // exponential lambda
  std::size_t length = 4000;  // hours
  std::vector<double> reference;  // kReferenceFile only

  void validate() const;
};

/// Clean ground-truth series. Only the exponential kind consumes randomness.
std::vector<double> gen_base(const BaseSignalSpec& spec, std::uint64_t seed);

struct NoiseConfig {
  double gaussian_mean = 0.0;
  double gaussian_std = 0.0;
  double p_gaussian = 0.0;
  double factor = 1.0;
  double p_factor = 0.0;
  double spike_factor = 1.0;
  double p_spike = 0.0;
  double p_na = 0.0;
  std::size_t max_na_per_row = 0;

  void validate(std::size_t channels) const;

  static NoiseConfig none() { return {}; }
  /// Moderate noise resembling field data.
  static NoiseConfig moderate();
  /// Extreme noise under which recovery fails.
  static NoiseConfig extreme();
  static NoiseConfig preset(const std::string& name);

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct SyntheticLocation {
  std::vector<double> base;
  Matrix channels;  // T x channels, NA = NaN
  std::uint64_t seed = 0;
};

/// Per point and channel: add N(mean, std^2) with p_gaussian, multiply by
/// factor with p_factor, multiply by spike_factor with p_spike, then replace
/// with NA with p_na. Rows with more than max_na_per_row NA candidates keep a
/// uniformly chosen subset of that size. Each channel draws from its own
/// stream, so the parallel path is bitwise identical to the serial one.
SyntheticLocation inject_noise(const std::vector<double>& base, const NoiseConfig& cfg,
                               std::size_t channels, std::uint64_t seed,
                               Execution exec = Execution::kParallel);

/// First hour of every generated series, 2024-01-01T00:00Z.
inline constexpr data::HourIndex kSynthStartHour = 473352;

/// Channels as sensors s1..sd, base as the reference.
data::LocationDataset to_location(const SyntheticLocation& synth, std::string id = "synthetic");

}  // namespace veli::synth

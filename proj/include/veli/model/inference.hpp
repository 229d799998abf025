#pragma once

#include <random>
#include <span>
#include <vector>

#include "veli/model/veli_model.hpp"
#include "veli/parallel.hpp"

namespace veli::model {

/// De-standardized point estimate with its one-standard-deviation band.
struct CorrectedReading {
  std::vector<double> y_hat;   // per channel, original units
  std::vector<double> y_std;   // sqrt of the decoder variance, original units
  std::vector<double> z_mean;  // latent used for decoding

  /// Mean of y_hat over channels; the fused corrected reading.
  double fused() const;

  friend bool operator==(const CorrectedReading&, const CorrectedReading&) = default;
};

/// z := encoder mean, y_hat := decoder mean. No randomness involved.
CorrectedReading infer(const VeliModel& model, const SensorSnapshot& snap);

/// Same as infer but decodes from a z sampled from the encoder distribution.
CorrectedReading infer_sampled(const VeliModel& model, const SensorSnapshot& snap,
                               std::mt19937_64& rng);

std::vector<CorrectedReading> infer_batch(const VeliModel& model,
                                          std::span<const SensorSnapshot> snaps,
                                          Execution exec = Execution::kParallel);

}  // namespace veli::model

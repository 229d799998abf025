#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "veli/model/veli_model.hpp"
#include "veli/parallel.hpp"

namespace veli::model {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-6;
  std::uint64_t seed = 0;
  Execution execution = Execution::kParallel;
  /// Called after every epoch with (epoch index, epoch-mean loss).
  std::function<void(std::size_t, const LossBreakdown&)> on_epoch;

  void validate() const;
};

struct TrainResult {
  std::vector<LossBreakdown> history;  // one epoch-mean entry per epoch
  std::size_t steps = 0;
};

/// Minimizes the mean batch negative ELBO with Adam over every parameter.
/// Uses model.config().samples Monte-Carlo draws per snapshot. Shuffling and
/// sampling are driven by cfg.seed only.
///
/// Throws DataError for an empty dataset or a snapshot without observations,
/// NumericalError on a non-finite loss; in that case the model keeps the
/// parameters of the last successful step.
TrainResult train(VeliModel& model, std::span<const SensorSnapshot> data, const TrainConfig& cfg);

/// Encoder-only training: the decoder, both priors and the noise head stay
/// bitwise frozen.
TrainResult fine_tune(VeliModel& model, std::span<const SensorSnapshot> data, const TrainConfig& cfg);

inline constexpr std::size_t kDefaultFineTuneEpochs = 30;

}  // namespace veli::model

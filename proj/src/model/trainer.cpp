#include "veli/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "veli/error.hpp"
#include "veli/model/batch_gradient.hpp"
#include "veli/nn/adam.hpp"

namespace veli::model {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!std::isfinite(learning_rate) || learning_rate <= 0.0)
    throw ConfigError("learning rate must be positive and finite");
}

namespace {

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.kl_z) && std::isfinite(l.kl_y) && std::isfinite(l.recon_nll) &&
         std::isfinite(l.total);
}

TrainResult run(VeliModel& model, std::span<const SensorSnapshot> data, const TrainConfig& cfg,
                ParamSegment trainable) {
  cfg.validate();
  if (data.empty()) throw DataError("training dataset is empty");
  for (std::size_t i = 0; i < data.size(); ++i) {
    model.check_snapshot(data[i]);
    if (data[i].observed() == 0)
      throw DataError("snapshot " + std::to_string(i) + " has no observed channel");
  }

  TrainResult result;
  if (cfg.epochs == 0) return result;

  std::mt19937_64 rng(cfg.seed);
  nn::OptimizerState opt(trainable.count, nn::AdamConfig{cfg.learning_rate});
  std::vector<double> params = model.parameters();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t samples = model.config().samples;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown sum;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      std::vector<SampleNoise> noise;
      noise.reserve(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) noise.push_back(draw_noise(model, samples, rng));

      const auto bg = batch_gradient(model, data, idx, noise, cfg.execution);
      if (!finite(bg.mean_loss))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_index));
      try {
        nn::adam_step(opt, std::span<double>(params).subspan(trainable.offset, trainable.count),
                      std::span<const double>(bg.grad).subspan(trainable.offset, trainable.count));
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
      }
      model.set_parameters(params);
      ++result.steps;

      const double w = static_cast<double>(idx.size());
      sum.kl_z += w * bg.mean_loss.kl_z;
      sum.kl_y += w * bg.mean_loss.kl_y;
      sum.recon_nll += w * bg.mean_loss.recon_nll;
      sum.total += w * bg.mean_loss.total;
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    LossBreakdown mean{sum.kl_z * inv, sum.kl_y * inv, sum.recon_nll * inv, sum.total * inv};
    result.history.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace

TrainResult train(VeliModel& model, std::span<const SensorSnapshot> data, const TrainConfig& cfg) {
  return run(model, data, cfg, ParamSegment{0, model.param_count()});
}

TrainResult fine_tune(VeliModel& model, std::span<const SensorSnapshot> data, const TrainConfig& cfg) {
  return run(model, data, cfg, model.segment(Head::kEncoder));
}

}  // namespace veli::model

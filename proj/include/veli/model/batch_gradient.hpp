#pragma once

#include <span>
#include <vector>

#include "veli/model/veli_model.hpp"
#include "veli/parallel.hpp"

namespace veli::model {

struct BatchGradient {
  LossBreakdown mean_loss;    // averaged over the batch
  std::vector<double> grad;   // d(mean total loss)/dparams
};

/// Mean loss and gradient over the snapshots selected by `indices`, with
/// noise[j] feeding snapshot indices[j]. Per-snapshot gradients are computed
/// independently and summed in fixed chunks of consecutive samples, then the
/// chunk sums in order, so the parallel kernel is bitwise equal to the serial one.
BatchGradient batch_gradient(const VeliModel& model, std::span<const SensorSnapshot> data,
                             std::span<const std::size_t> indices, std::span<const SampleNoise> noise,
                             Execution exec = Execution::kParallel);

}  // namespace veli::model

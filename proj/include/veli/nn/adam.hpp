#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace veli::nn {

struct AdamConfig {
  double learning_rate = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  OptimizerState() = default;
  OptimizerState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}

  AdamConfig config;
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment, non-negative
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of params in place. Throws NumericalError
/// (leaving params and state untouched) if any gradient is NaN or infinite.
void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

}  // namespace veli::nn

#include "veli/nn/adam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "veli/error.hpp"

namespace veli::nn {

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size())
    throw DimensionError("adam_step gradient", params.size(), grads.size());
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw DimensionError("adam_step optimizer state", state.m.size(), params.size());
  const auto bad = std::find_if(grads.begin(), grads.end(), [](double g) { return !std::isfinite(g); });
  if (bad != grads.end())
    throw NumericalError("non-finite gradient at index " +
                         std::to_string(std::distance(grads.begin(), bad)));

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace veli::nn

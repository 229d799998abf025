#include "veli/nn/dense_net.hpp"

#include <algorithm>
#include <cmath>

#include "veli/error.hpp"

namespace veli::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSoftplus: return "softplus";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "softplus") return Activation::kSoftplus;
  throw ConfigError("unknown activation '" + name + "'");
}

double activate(Activation a, double x) noexcept {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kSoftplus:
      // log(1 + e^x) without overflow
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return x;
}

double activate_derivative(Activation a, double pre) noexcept {
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kSoftplus:
      if (pre >= 0.0) return 1.0 / (1.0 + std::exp(-pre));
      else {
        const double e = std::exp(pre);
        return e / (1.0 + e);
      }
  }
  return 1.0;
}

DenseNet::DenseNet(std::vector<LayerShape> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("DenseNet needs at least one layer");
  std::size_t total = 0;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.in == 0 || l.out == 0) throw ConfigError("DenseNet layer with zero width");
    if (k > 0 && layers_[k - 1].out != l.in)
      throw DimensionError("DenseNet layer " + std::to_string(k) + " input", layers_[k - 1].out,
                           l.in);
    offsets_.push_back(total);
    total += l.out * l.in + l.out;
  }
  params_.assign(total, 0.0);
}

DenseNet DenseNet::glorot(std::vector<LayerShape> layers, std::mt19937_64& rng) {
  DenseNet net(std::move(layers));
  for (std::size_t k = 0; k < net.layers_.size(); ++k) {
    const auto& l = net.layers_[k];
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : net.weights(k)) w = dist(rng);
  }
  return net;
}

std::span<double> DenseNet::weights(std::size_t k) {
  const auto& l = layers_.at(k);
  return std::span<double>(params_).subspan(weight_offset(k), l.out * l.in);
}

std::span<double> DenseNet::bias(std::size_t k) {
  const auto& l = layers_.at(k);
  return std::span<double>(params_).subspan(weight_offset(k) + l.out * l.in, l.out);
}

std::span<const double> DenseNet::weights(std::size_t k) const {
  const auto& l = layers_.at(k);
  return std::span<const double>(params_).subspan(weight_offset(k), l.out * l.in);
}

std::span<const double> DenseNet::bias(std::size_t k) const {
  const auto& l = layers_.at(k);
  return std::span<const double>(params_).subspan(weight_offset(k) + l.out * l.in, l.out);
}

std::vector<double> DenseNet::forward(std::span<const double> input) const {
  GradientTape tape;
  forward(input, tape);
  return std::move(tape.output);
}

void DenseNet::forward(std::span<const double> input, GradientTape& tape) const {
  if (layers_.empty()) throw ConfigError("forward on an empty DenseNet");
  if (input.size() != input_dim()) throw DimensionError("DenseNet input", input_dim(), input.size());
  tape.inputs.resize(layers_.size());
  tape.preactivations.resize(layers_.size());
  tape.inputs[0].assign(input.begin(), input.end());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    const auto& in = tape.inputs[k];
    auto& pre = tape.preactivations[k];
    pre.resize(l.out);
    const double* w = params_.data() + offsets_[k];
    const double* b = w + l.out * l.in;
    for (std::size_t o = 0; o < l.out; ++o) {
      double acc = b[o];
      const double* row = w + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * in[i];
      pre[o] = acc;
    }
    // Hidden activations become the next layer's recorded input.
    auto& out = (k + 1 == layers_.size()) ? tape.output : tape.inputs[k + 1];
    out.resize(l.out);
    for (std::size_t o = 0; o < l.out; ++o) out[o] = activate(l.activation, pre[o]);
  }
}

void DenseNet::backward(const GradientTape& tape, std::span<const double> grad_output,
                        std::span<double> grad_params, std::span<double> grad_input) const {
  if (grad_output.size() != output_dim())
    throw DimensionError("DenseNet output gradient", output_dim(), grad_output.size());
  if (grad_params.size() != params_.size())
    throw DimensionError("DenseNet parameter gradient", params_.size(), grad_params.size());
  if (!grad_input.empty() && grad_input.size() != input_dim())
    throw DimensionError("DenseNet input gradient", input_dim(), grad_input.size());
  if (tape.preactivations.size() != layers_.size())
    throw ConfigError("DenseNet::backward called with a tape from a different network");

  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    const auto& pre = tape.preactivations[k];
    const auto& in = tape.inputs[k];
    for (std::size_t o = 0; o < l.out; ++o) delta[o] *= activate_derivative(l.activation, pre[o]);

    double* gw = grad_params.data() + offsets_[k];
    double* gb = gw + l.out * l.in;
    const double* w = params_.data() + offsets_[k];
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* grow = gw + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) grow[i] += d * in[i];
    }
    const bool need_upstream = k > 0 || !grad_input.empty();
    if (!need_upstream) break;
    upstream.assign(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      const double* row = w + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) upstream[i] += row[i] * d;
    }
    delta.swap(upstream);
  }
  if (!grad_input.empty()) std::copy(delta.begin(), delta.end(), grad_input.begin());
}

bool DenseNet::all_finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> gradient(const DenseNet& net, std::span<const double> input,
                             const LossFunction& loss) {
  GradientTape tape;
  net.forward(input, tape);
  ScalarLoss l = loss(tape.output);
  if (!std::isfinite(l.value)) throw NumericalError("loss is not finite; backward pass skipped");
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(tape, l.grad_output, grad);
  return grad;
}

}  // namespace veli::nn

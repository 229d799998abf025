#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace veli::nn {

enum class Activation { kIdentity, kRelu, kSoftplus };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

double activate(Activation a, double x) noexcept;
/// Derivative of the activation with respect to its pre-activation input.
double activate_derivative(Activation a, double pre) noexcept;

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kIdentity;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Activations saved by a forward pass; replayed backward by DenseNet::backward.
struct GradientTape {
  std::vector<std::vector<double>> inputs;        // input to layer k
  std::vector<std::vector<double>> preactivations;  // W x + b of layer k
  std::vector<double> output;
};

/// A chain of affine layers with elementwise activations. All parameters live
/// in one contiguous vector laid out layer by layer as [W (out x in, row-major), b].
class DenseNet {
 public:
  DenseNet() = default;
  /// Zero-initialized network. Throws ConfigError if dimensions do not chain.
  explicit DenseNet(std::vector<LayerShape> layers);

  /// Glorot-uniform weights, zero biases.
  static DenseNet glorot(std::vector<LayerShape> layers, std::mt19937_64& rng);

  std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const LayerShape& layer(std::size_t k) const { return layers_.at(k); }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  std::size_t param_count() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> weights(std::size_t k);
  std::span<double> bias(std::size_t k);
  std::span<const double> weights(std::size_t k) const;
  std::span<const double> bias(std::size_t k) const;

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, GradientTape& tape) const;

  /// Accumulates dL/dparams into grad_params (same layout as params()) and, if
  /// grad_input is non-empty, writes dL/dinput into it.
  void backward(const GradientTape& tape, std::span<const double> grad_output,
                std::span<double> grad_params, std::span<double> grad_input = {}) const;

  bool all_finite() const noexcept;

  friend bool operator==(const DenseNet&, const DenseNet&) = default;

 private:
  std::size_t weight_offset(std::size_t k) const { return offsets_.at(k); }

  std::vector<LayerShape> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Scalar loss evaluated on a network output together with its gradient.
struct ScalarLoss {
  double value = 0.0;
  std::vector<double> grad_output;
};

using LossFunction = std::function<ScalarLoss(std::span<const double> output)>;

/// Gradient of loss(net(input)) with respect to every parameter of net.
/// Throws NumericalError if the loss is not finite.
std::vector<double> gradient(const DenseNet& net, std::span<const double> input,
                             const LossFunction& loss);

}  // namespace veli::nn

#pragma once

#include <random>
#include <span>

#include "veli/model/gaussian.hpp"
#include "veli/nn/dense_net.hpp"

namespace veli::model {

/// Distribution block: two hidden layers followed by separate mean and
/// log-variance layers. Parameters are laid out [trunk | mean | log_variance].
class GaussianHead {
 public:
  struct Tape {
    nn::GradientTape trunk;
    nn::GradientTape mean;
    nn::GradientTape log_variance;
  };

  GaussianHead() = default;
  GaussianHead(std::size_t input_dim, std::size_t output_dim, std::size_t hidden,
               std::mt19937_64& rng);
  GaussianHead(nn::DenseNet trunk, nn::DenseNet mean, nn::DenseNet log_variance);

  std::size_t input_dim() const noexcept { return trunk_.input_dim(); }
  std::size_t output_dim() const noexcept { return mean_.output_dim(); }
  std::size_t param_count() const noexcept {
    return trunk_.param_count() + mean_.param_count() + log_variance_.param_count();
  }

  GaussianParams forward(std::span<const double> input) const;
  GaussianParams forward(std::span<const double> input, Tape& tape) const;

  /// d_log_variance is taken with respect to the clamped log-variance; it is
  /// zeroed where the raw value sat outside the clamp range.
  void backward(const Tape& tape, std::span<const double> d_mean,
                std::span<const double> d_log_variance, std::span<double> grad_params,
                std::span<double> grad_input = {}) const;

  void copy_params_to(std::span<double> out) const;
  void set_params(std::span<const double> in);

  const nn::DenseNet& trunk() const noexcept { return trunk_; }
  const nn::DenseNet& mean_layer() const noexcept { return mean_; }
  const nn::DenseNet& log_variance_layer() const noexcept { return log_variance_; }
  nn::DenseNet& trunk() noexcept { return trunk_; }
  nn::DenseNet& mean_layer() noexcept { return mean_; }
  nn::DenseNet& log_variance_layer() noexcept { return log_variance_; }

  friend bool operator==(const GaussianHead&, const GaussianHead&) = default;

 private:
  nn::DenseNet trunk_;
  nn::DenseNet mean_;
  nn::DenseNet log_variance_;
};

}  // namespace veli::model

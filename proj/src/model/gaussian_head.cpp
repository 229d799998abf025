#include "veli/model/gaussian_head.hpp"

#include <algorithm>

#include "veli/error.hpp"

namespace veli::model {

using nn::Activation;
using nn::DenseNet;

GaussianHead::GaussianHead(std::size_t input_dim, std::size_t output_dim, std::size_t hidden,
                           std::mt19937_64& rng)
    : trunk_(DenseNet::glorot({{input_dim, hidden, Activation::kSoftplus},
                               {hidden, hidden, Activation::kSoftplus}},
                              rng)),
      mean_(DenseNet::glorot({{hidden, output_dim, Activation::kIdentity}}, rng)),
      log_variance_(DenseNet::glorot({{hidden, output_dim, Activation::kIdentity}}, rng)) {}

GaussianHead::GaussianHead(DenseNet trunk, DenseNet mean, DenseNet log_variance)
    : trunk_(std::move(trunk)), mean_(std::move(mean)), log_variance_(std::move(log_variance)) {
  if (mean_.input_dim() != trunk_.output_dim())
    throw DimensionError("GaussianHead mean layer input", trunk_.output_dim(), mean_.input_dim());
  if (log_variance_.input_dim() != trunk_.output_dim())
    throw DimensionError("GaussianHead log-variance layer input", trunk_.output_dim(),
                         log_variance_.input_dim());
  if (log_variance_.output_dim() != mean_.output_dim())
    throw DimensionError("GaussianHead log-variance width", mean_.output_dim(),
                         log_variance_.output_dim());
}

GaussianParams GaussianHead::forward(std::span<const double> input) const {
  Tape tape;
  return forward(input, tape);
}

GaussianParams GaussianHead::forward(std::span<const double> input, Tape& tape) const {
  trunk_.forward(input, tape.trunk);
  mean_.forward(tape.trunk.output, tape.mean);
  log_variance_.forward(tape.trunk.output, tape.log_variance);
  GaussianParams out;
  out.mean = tape.mean.output;
  out.log_variance.resize(tape.log_variance.output.size());
  std::transform(tape.log_variance.output.begin(), tape.log_variance.output.end(),
                 out.log_variance.begin(), clamp_log_variance);
  return out;
}

void GaussianHead::backward(const Tape& tape, std::span<const double> d_mean,
                            std::span<const double> d_log_variance, std::span<double> grad_params,
                            std::span<double> grad_input) const {
  if (grad_params.size() != param_count())
    throw DimensionError("GaussianHead parameter gradient", param_count(), grad_params.size());
  const std::size_t n_trunk = trunk_.param_count();
  const std::size_t n_mean = mean_.param_count();
  auto g_trunk = grad_params.subspan(0, n_trunk);
  auto g_mean = grad_params.subspan(n_trunk, n_mean);
  auto g_logvar = grad_params.subspan(n_trunk + n_mean);

  std::vector<double> d_raw(d_log_variance.begin(), d_log_variance.end());
  const auto& raw = tape.log_variance.output;
  for (std::size_t i = 0; i < d_raw.size(); ++i)
    if (raw[i] < kLogVarianceMin || raw[i] > kLogVarianceMax) d_raw[i] = 0.0;

  std::vector<double> d_hidden(trunk_.output_dim(), 0.0);
  std::vector<double> d_hidden_lv(trunk_.output_dim(), 0.0);
  mean_.backward(tape.mean, d_mean, g_mean, d_hidden);
  log_variance_.backward(tape.log_variance, d_raw, g_logvar, d_hidden_lv);
  for (std::size_t i = 0; i < d_hidden.size(); ++i) d_hidden[i] += d_hidden_lv[i];
  trunk_.backward(tape.trunk, d_hidden, g_trunk, grad_input);
}

void GaussianHead::copy_params_to(std::span<double> out) const {
  if (out.size() != param_count()) throw DimensionError("GaussianHead parameters", param_count(), out.size());
  auto it = std::copy(trunk_.params().begin(), trunk_.params().end(), out.begin());
  it = std::copy(mean_.params().begin(), mean_.params().end(), it);
  std::copy(log_variance_.params().begin(), log_variance_.params().end(), it);
}

void GaussianHead::set_params(std::span<const double> in) {
  if (in.size() != param_count()) throw DimensionError("GaussianHead parameters", param_count(), in.size());
  auto src = in.begin();
  for (DenseNet* net : {&trunk_, &mean_, &log_variance_}) {
    auto p = net->params();
    std::copy(src, src + static_cast<std::ptrdiff_t>(p.size()), p.begin());
    src += static_cast<std::ptrdiff_t>(p.size());
  }
}

}  // namespace veli::model

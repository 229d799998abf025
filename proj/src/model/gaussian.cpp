#include "veli/model/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "veli/error.hpp"

namespace veli::model {

double clamp_log_variance(double raw) noexcept {
  return std::clamp(raw, kLogVarianceMin, kLogVarianceMax);
}

double GaussianParams::variance(std::size_t i) const { return std::exp(log_variance.at(i)); }

namespace {

void check_pair(const GaussianParams& q, const GaussianParams& p) {
  if (q.mean.size() != q.log_variance.size())
    throw DimensionError("GaussianParams log-variance", q.mean.size(), q.log_variance.size());
  if (p.mean.size() != p.log_variance.size())
    throw DimensionError("GaussianParams log-variance", p.mean.size(), p.log_variance.size());
  if (q.size() != p.size()) throw DimensionError("KL divergence operands", q.size(), p.size());
}

void check_recon(std::span<const double> x, std::span<const double> mask,
                 std::span<const double> y_hat, const GaussianParams& sens) {
  const auto d = x.size();
  if (mask.size() != d) throw DimensionError("reconstruction mask", d, mask.size());
  if (y_hat.size() != d) throw DimensionError("reconstruction prediction", d, y_hat.size());
  if (sens.mean.size() != d) throw DimensionError("sensor noise mean", d, sens.mean.size());
  if (sens.log_variance.size() != d)
    throw DimensionError("sensor noise log-variance", d, sens.log_variance.size());
}

}  // namespace

double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p) {
  check_pair(q, p);
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double vq = std::exp(q.log_variance[i]);
    const double vp = std::exp(p.log_variance[i]);
    const double diff = q.mean[i] - p.mean[i];
    kl += 0.5 * (p.log_variance[i] - q.log_variance[i] + (vq + diff * diff) / vp - 1.0);
  }
  return kl;
}

void kl_diag_gaussian_grad(const GaussianParams& q, const GaussianParams& p, double scale,
                           std::span<double> d_q_mean, std::span<double> d_q_logvar,
                           std::span<double> d_p_mean, std::span<double> d_p_logvar) {
  check_pair(q, p);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double vq = std::exp(q.log_variance[i]);
    const double vp = std::exp(p.log_variance[i]);
    const double diff = q.mean[i] - p.mean[i];
    d_q_mean[i] += scale * diff / vp;
    d_p_mean[i] -= scale * diff / vp;
    d_q_logvar[i] += scale * 0.5 * (vq / vp - 1.0);
    d_p_logvar[i] += scale * 0.5 * (1.0 - (vq + diff * diff) / vp);
  }
}

std::vector<double> reparameterize(const GaussianParams& params, std::span<const double> noise) {
  if (noise.size() != params.size()) throw DimensionError("reparameterization noise", params.size(), noise.size());
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = params.mean[i] + std::exp(0.5 * params.log_variance[i]) * noise[i];
  return out;
}

std::vector<double> standard_normal(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> u(k);
  for (double& v : u) v = n01(rng);
  return u;
}

std::vector<double> reparam_sample(const GaussianParams& params, std::mt19937_64& rng) {
  const auto u = standard_normal(params.size(), rng);
  return reparameterize(params, u);
}

double reconstruction_nll(std::span<const double> x, std::span<const double> mask,
                          std::span<const double> y_hat, const GaussianParams& sens) {
  check_recon(x, mask, y_hat, sens);
  constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double lv = sens.log_variance[i];
    const double r = x[i] - y_hat[i] - sens.mean[i];
    total += mask[i] * (kLog2Pi + lv + r * r * std::exp(-lv));
  }
  return total;
}

void reconstruction_nll_grad(std::span<const double> x, std::span<const double> mask,
                             std::span<const double> y_hat, const GaussianParams& sens, double scale,
                             std::span<double> d_y_hat, std::span<double> d_sens_mean,
                             std::span<double> d_sens_logvar) {
  check_recon(x, mask, y_hat, sens);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double inv_var = std::exp(-sens.log_variance[i]);
    const double r = x[i] - y_hat[i] - sens.mean[i];
    const double w = scale * mask[i];
    d_y_hat[i] += w * (-2.0 * r * inv_var);
    d_sens_mean[i] += w * (-2.0 * r * inv_var);
    d_sens_logvar[i] += w * (1.0 - r * r * inv_var);
  }
}

}  // namespace veli::model

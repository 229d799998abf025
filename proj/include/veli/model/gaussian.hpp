#pragma once

#include <random>
#include <span>
#include <vector>

namespace veli::model {

inline constexpr double kLogVarianceMin = -10.0;
inline constexpr double kLogVarianceMax = 10.0;

double clamp_log_variance(double raw) noexcept;

/// Diagonal Gaussian emitted by a distribution head.
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> log_variance;  // clamped to [kLogVarianceMin, kLogVarianceMax]

  std::size_t size() const noexcept { return mean.size(); }
  double variance(std::size_t i) const;

  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

/// KL(q || p) for diagonal Gaussians, summed over dimensions.
double kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p);

/// Partial derivatives of kl_diag_gaussian; each span must have size q.size()
/// and is accumulated into (scaled by `scale`).
void kl_diag_gaussian_grad(const GaussianParams& q, const GaussianParams& p, double scale,
                           std::span<double> d_q_mean, std::span<double> d_q_logvar,
                           std::span<double> d_p_mean, std::span<double> d_p_logvar);

/// mean + exp(log_variance / 2) * noise, with `noise` standard normal.
std::vector<double> reparameterize(const GaussianParams& params, std::span<const double> noise);

std::vector<double> standard_normal(std::size_t k, std::mt19937_64& rng);

/// Draws one reparameterized sample using fresh noise from rng.
std::vector<double> reparam_sample(const GaussianParams& params, std::mt19937_64& rng);

/// Heteroscedastic sensor likelihood term:
///   sum_i mask_i * [ log(2 pi s_i) + (x_i - y_hat_i - m_i)^2 / s_i ]
/// with (m, log s) = sens. Masked channels contribute nothing.
double reconstruction_nll(std::span<const double> x, std::span<const double> mask,
                          std::span<const double> y_hat, const GaussianParams& sens);

/// Accumulates scale * d(reconstruction_nll) into the given spans.
void reconstruction_nll_grad(std::span<const double> x, std::span<const double> mask,
                             std::span<const double> y_hat, const GaussianParams& sens, double scale,
                             std::span<double> d_y_hat, std::span<double> d_sens_mean,
                             std::span<double> d_sens_logvar);

}  // namespace veli::model

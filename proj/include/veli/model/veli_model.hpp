#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "veli/data/standardize.hpp"
#include "veli/model/gaussian.hpp"
#include "veli/model/gaussian_head.hpp"
#include "veli/model/snapshot.hpp"

namespace veli::model {

/// Weights of the three negative-ELBO terms.
struct LossWeights {
  double alpha = 1.0;    // reconstruction
  double beta_z = 10.0;  // KL on the latent z
  double beta_y = 0.1;   // KL on the clean reading y

  /// Throws ConfigError unless all three weights are finite and positive.
  void validate() const;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct ModelConfig {
  std::size_t sensors = 10;  // d
  std::size_t latent = 4;    // r, must not exceed d
  std::size_t hidden = 32;
  std::size_t samples = 1;   // Monte-Carlo draws of (z, y) per snapshot
  LossWeights weights;

  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Head : std::size_t { kEncoder = 0, kPriorZ, kDecoder, kPriorY, kNoise };
inline constexpr std::size_t kHeadCount = 5;

const char* head_name(Head h) noexcept;

struct ParamSegment {
  std::size_t offset = 0;
  std::size_t count = 0;
};

/// Encoder q(z | x, psi), prior p(z | psi), decoder q(y | z, x, psi),
/// prior p(y | z, psi) and the sensor-noise head (mu_sens, log sigma^2_sens)(z).
///
/// The flat parameter vector concatenates the heads in Head order.
class VeliModel {
 public:
  VeliModel(const ModelConfig& config, std::uint64_t seed);
  VeliModel(const ModelConfig& config, std::array<GaussianHead, kHeadCount> heads,
            data::ChannelStats stats, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t sensors() const noexcept { return config_.sensors; }
  std::size_t latent() const noexcept { return config_.latent; }
  std::uint64_t seed() const noexcept { return seed_; }

  const LossWeights& weights() const noexcept { return config_.weights; }
  void set_weights(const LossWeights& w);
  void set_samples(std::size_t k);

  const GaussianHead& head(Head h) const { return heads_[static_cast<std::size_t>(h)]; }
  GaussianHead& head(Head h) { return heads_[static_cast<std::size_t>(h)]; }

  std::size_t param_count() const noexcept;
  ParamSegment segment(Head h) const noexcept;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  const data::ChannelStats& standardization() const noexcept { return stats_; }
  void set_standardization(data::ChannelStats stats);

  /// Throws DimensionError when the snapshot does not match the sensor count.
  void check_snapshot(const SensorSnapshot& snap) const;

  friend bool operator==(const VeliModel&, const VeliModel&) = default;

 private:
  ModelConfig config_;
  std::array<GaussianHead, kHeadCount> heads_;
  data::ChannelStats stats_;
  std::uint64_t seed_ = 0;
};

/// Standard-normal draws feeding the reparameterization of z and y,
/// one vector per Monte-Carlo sample.
struct SampleNoise {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> y;

  std::size_t samples() const noexcept { return z.size(); }
};

SampleNoise draw_noise(const VeliModel& model, std::size_t samples, std::mt19937_64& rng);

struct LatentSample {
  std::vector<double> z;
  GaussianParams q_y;   // decoder
  GaussianParams p_y;   // conditional prior on y
  GaussianParams sens;  // (mu_sens, log sigma^2_sens)
  std::vector<double> y;
};

struct ForwardResult {
  GaussianParams q_z;
  GaussianParams p_z;
  std::vector<LatentSample> samples;
};

ForwardResult forward(const VeliModel& model, const SensorSnapshot& snap, const SampleNoise& noise);
ForwardResult forward(const VeliModel& model, const SensorSnapshot& snap, std::mt19937_64& rng,
                      std::size_t samples);

struct LossBreakdown {
  double kl_z = 0.0;
  double kl_y = 0.0;
  double recon_nll = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

/// beta_z * kl_z + beta_y * kl_y + alpha * recon, always evaluated in this order.
double combine_loss(double kl_z, double kl_y, double recon_nll, const LossWeights& w) noexcept;

LossBreakdown loss(const ForwardResult& fwd, const SensorSnapshot& snap, const LossWeights& w);

/// Loss of one snapshot under fixed noise, with scale * dLoss/dparams
/// accumulated into grad (flat model layout).
LossBreakdown loss_gradient(const VeliModel& model, const SensorSnapshot& snap,
                            const SampleNoise& noise, std::span<double> grad, double scale = 1.0);

}  // namespace veli::model

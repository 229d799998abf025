#include "veli/model/veli_model.hpp"

#include <cmath>
#include <string>

#include "veli/error.hpp"

namespace veli::model {

void LossWeights::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw ConfigError(std::string("loss weight ") + name + " must be positive and finite, got " +
                        std::to_string(v));
  };
  check(alpha, "alpha");
  check(beta_z, "beta_z");
  check(beta_y, "beta_y");
}

void ModelConfig::validate() const {
  if (sensors == 0) throw ConfigError("model needs at least one sensor");
  if (latent == 0) throw ConfigError("latent dimension must be positive");
  if (latent > sensors)
    throw ConfigError("latent dimension " + std::to_string(latent) + " exceeds sensor count " +
                      std::to_string(sensors));
  if (hidden == 0) throw ConfigError("hidden width must be positive");
  if (samples == 0) throw ConfigError("at least one Monte-Carlo sample is required");
  weights.validate();
}

const char* head_name(Head h) noexcept {
  switch (h) {
    case Head::kEncoder: return "encoder";
    case Head::kPriorZ: return "prior_z";
    case Head::kDecoder: return "decoder";
    case Head::kPriorY: return "prior_y";
    case Head::kNoise: return "noise";
  }
  return "?";
}

namespace {

struct HeadDims {
  std::size_t in;
  std::size_t out;
};

std::array<HeadDims, kHeadCount> head_dims(const ModelConfig& c) {
  const auto d = c.sensors, r = c.latent;
  return {{
      {2 * d, r},      // encoder: [x, psi]
      {d, r},          // prior_z: psi
      {r + 2 * d, d},  // decoder: [z, x, psi]
      {r + d, d},      // prior_y: [z, psi]
      {r, d},          // noise: z
  }};
}

}  // namespace

VeliModel::VeliModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), stats_(data::ChannelStats::identity(config.sensors)), seed_(seed) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto dims = head_dims(config_);
  for (std::size_t h = 0; h < kHeadCount; ++h)
    heads_[h] = GaussianHead(dims[h].in, dims[h].out, config_.hidden, rng);
}

VeliModel::VeliModel(const ModelConfig& config, std::array<GaussianHead, kHeadCount> heads,
                     data::ChannelStats stats, std::uint64_t seed)
    : config_(config), heads_(std::move(heads)), seed_(seed) {
  config_.validate();
  const auto dims = head_dims(config_);
  for (std::size_t h = 0; h < kHeadCount; ++h) {
    if (heads_[h].input_dim() != dims[h].in)
      throw DimensionError(std::string(head_name(Head(h))) + " input", dims[h].in, heads_[h].input_dim());
    if (heads_[h].output_dim() != dims[h].out)
      throw DimensionError(std::string(head_name(Head(h))) + " output", dims[h].out,
                           heads_[h].output_dim());
  }
  set_standardization(std::move(stats));
}

void VeliModel::set_weights(const LossWeights& w) {
  w.validate();
  config_.weights = w;
}

void VeliModel::set_samples(std::size_t k) {
  if (k == 0) throw ConfigError("at least one Monte-Carlo sample is required");
  config_.samples = k;
}

std::size_t VeliModel::param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& h : heads_) n += h.param_count();
  return n;
}

ParamSegment VeliModel::segment(Head h) const noexcept {
  std::size_t offset = 0;
  const auto idx = static_cast<std::size_t>(h);
  for (std::size_t i = 0; i < idx; ++i) offset += heads_[i].param_count();
  return {offset, heads_[idx].param_count()};
}

std::vector<double> VeliModel::parameters() const {
  std::vector<double> flat(param_count());
  std::size_t offset = 0;
  for (const auto& h : heads_) {
    h.copy_params_to(std::span<double>(flat).subspan(offset, h.param_count()));
    offset += h.param_count();
  }
  return flat;
}

void VeliModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != param_count()) throw DimensionError("model parameters", param_count(), flat.size());
  std::size_t offset = 0;
  for (auto& h : heads_) {
    h.set_params(flat.subspan(offset, h.param_count()));
    offset += h.param_count();
  }
}

void VeliModel::set_standardization(data::ChannelStats stats) {
  if (stats.mean.size() != config_.sensors || stats.scale.size() != config_.sensors)
    throw DimensionError("standardization statistics", config_.sensors, stats.mean.size());
  stats_ = std::move(stats);
}

void VeliModel::check_snapshot(const SensorSnapshot& snap) const {
  if (snap.x.size() != config_.sensors) throw DimensionError("snapshot readings", config_.sensors, snap.x.size());
  if (snap.mask.size() != config_.sensors) throw DimensionError("snapshot mask", config_.sensors, snap.mask.size());
}

SampleNoise draw_noise(const VeliModel& model, std::size_t samples, std::mt19937_64& rng) {
  if (samples == 0) throw ConfigError("at least one Monte-Carlo sample is required");
  SampleNoise noise;
  for (std::size_t k = 0; k < samples; ++k) {
    noise.z.push_back(standard_normal(model.latent(), rng));
    noise.y.push_back(standard_normal(model.sensors(), rng));
  }
  return noise;
}

namespace {

std::vector<double> concat(std::initializer_list<std::span<const double>> parts) {
  std::size_t n = 0;
  for (auto p : parts) n += p.size();
  std::vector<double> out;
  out.reserve(n);
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

void check_noise(const VeliModel& model, const SampleNoise& noise) {
  if (noise.z.empty()) throw ConfigError("at least one Monte-Carlo sample is required");
  if (noise.y.size() != noise.z.size()) throw DimensionError("y noise samples", noise.z.size(), noise.y.size());
  for (std::size_t k = 0; k < noise.z.size(); ++k) {
    if (noise.z[k].size() != model.latent()) throw DimensionError("z noise", model.latent(), noise.z[k].size());
    if (noise.y[k].size() != model.sensors()) throw DimensionError("y noise", model.sensors(), noise.y[k].size());
  }
}

}  // namespace

ForwardResult forward(const VeliModel& model, const SensorSnapshot& snap, const SampleNoise& noise) {
  model.check_snapshot(snap);
  check_noise(model, noise);
  ForwardResult out;
  out.q_z = model.head(Head::kEncoder).forward(concat({snap.x, snap.mask}));
  out.p_z = model.head(Head::kPriorZ).forward(snap.mask);
  for (std::size_t k = 0; k < noise.samples(); ++k) {
    LatentSample s;
    s.z = reparameterize(out.q_z, noise.z[k]);
    s.q_y = model.head(Head::kDecoder).forward(concat({s.z, snap.x, snap.mask}));
    s.p_y = model.head(Head::kPriorY).forward(concat({s.z, snap.mask}));
    s.sens = model.head(Head::kNoise).forward(s.z);
    s.y = reparameterize(s.q_y, noise.y[k]);
    out.samples.push_back(std::move(s));
  }
  return out;
}

ForwardResult forward(const VeliModel& model, const SensorSnapshot& snap, std::mt19937_64& rng,
                      std::size_t samples) {
  return forward(model, snap, draw_noise(model, samples, rng));
}

double combine_loss(double kl_z, double kl_y, double recon_nll, const LossWeights& w) noexcept {
  return w.beta_z * kl_z + w.beta_y * kl_y + w.alpha * recon_nll;
}

LossBreakdown loss(const ForwardResult& fwd, const SensorSnapshot& snap, const LossWeights& w) {
  if (fwd.samples.empty()) throw ConfigError("forward result holds no samples");
  LossBreakdown out;
  out.kl_z = kl_diag_gaussian(fwd.q_z, fwd.p_z);
  const double inv_k = 1.0 / static_cast<double>(fwd.samples.size());
  for (const auto& s : fwd.samples) {
    out.kl_y += inv_k * kl_diag_gaussian(s.q_y, s.p_y);
    out.recon_nll += inv_k * reconstruction_nll(snap.x, snap.mask, s.y, s.sens);
  }
  out.total = combine_loss(out.kl_z, out.kl_y, out.recon_nll, w);
  return out;
}

LossBreakdown loss_gradient(const VeliModel& model, const SensorSnapshot& snap,
                            const SampleNoise& noise, std::span<double> grad, double scale) {
  model.check_snapshot(snap);
  check_noise(model, noise);
  if (grad.size() != model.param_count()) throw DimensionError("model gradient", model.param_count(), grad.size());
  const auto& w = model.weights();
  const std::size_t d = model.sensors(), r = model.latent();
  auto seg = [&](Head h) {
    const auto s = model.segment(h);
    return grad.subspan(s.offset, s.count);
  };

  GaussianHead::Tape enc_tape, pz_tape;
  const GaussianParams q_z = model.head(Head::kEncoder).forward(concat({snap.x, snap.mask}), enc_tape);
  const GaussianParams p_z = model.head(Head::kPriorZ).forward(snap.mask, pz_tape);

  LossBreakdown out;
  out.kl_z = kl_diag_gaussian(q_z, p_z);

  std::vector<double> d_qz_mean(r, 0.0), d_qz_lv(r, 0.0), d_pz_mean(r, 0.0), d_pz_lv(r, 0.0);
  kl_diag_gaussian_grad(q_z, p_z, scale * w.beta_z, d_qz_mean, d_qz_lv, d_pz_mean, d_pz_lv);

  const double inv_k = 1.0 / static_cast<double>(noise.samples());
  GaussianHead::Tape dec_tape, py_tape, noise_tape;
  std::vector<double> d_qy_mean(d), d_qy_lv(d), d_py_mean(d), d_py_lv(d), d_y(d), d_sm(d), d_slv(d);
  std::vector<double> d_dec_in(r + 2 * d), d_py_in(r + d), d_noise_in(r), d_z(r);
  for (std::size_t k = 0; k < noise.samples(); ++k) {
    const auto z = reparameterize(q_z, noise.z[k]);
    const GaussianParams q_y = model.head(Head::kDecoder).forward(concat({z, snap.x, snap.mask}), dec_tape);
    const GaussianParams p_y = model.head(Head::kPriorY).forward(concat({z, snap.mask}), py_tape);
    const GaussianParams sens = model.head(Head::kNoise).forward(z, noise_tape);
    const auto y = reparameterize(q_y, noise.y[k]);

    out.kl_y += inv_k * kl_diag_gaussian(q_y, p_y);
    out.recon_nll += inv_k * reconstruction_nll(snap.x, snap.mask, y, sens);

    std::fill(d_qy_mean.begin(), d_qy_mean.end(), 0.0);
    std::fill(d_qy_lv.begin(), d_qy_lv.end(), 0.0);
    std::fill(d_py_mean.begin(), d_py_mean.end(), 0.0);
    std::fill(d_py_lv.begin(), d_py_lv.end(), 0.0);
    std::fill(d_y.begin(), d_y.end(), 0.0);
    std::fill(d_sm.begin(), d_sm.end(), 0.0);
    std::fill(d_slv.begin(), d_slv.end(), 0.0);
    kl_diag_gaussian_grad(q_y, p_y, scale * inv_k * w.beta_y, d_qy_mean, d_qy_lv, d_py_mean, d_py_lv);
    reconstruction_nll_grad(snap.x, snap.mask, y, sens, scale * inv_k * w.alpha, d_y, d_sm, d_slv);

    // y = mu + exp(lv / 2) * eps
    for (std::size_t i = 0; i < d; ++i) {
      d_qy_mean[i] += d_y[i];
      d_qy_lv[i] += d_y[i] * noise.y[k][i] * 0.5 * std::exp(0.5 * q_y.log_variance[i]);
    }

    model.head(Head::kDecoder).backward(dec_tape, d_qy_mean, d_qy_lv, seg(Head::kDecoder), d_dec_in);
    model.head(Head::kPriorY).backward(py_tape, d_py_mean, d_py_lv, seg(Head::kPriorY), d_py_in);
    model.head(Head::kNoise).backward(noise_tape, d_sm, d_slv, seg(Head::kNoise), d_noise_in);

    for (std::size_t j = 0; j < r; ++j) d_z[j] = d_dec_in[j] + d_py_in[j] + d_noise_in[j];
    // z = mu + exp(lv / 2) * eps
    for (std::size_t j = 0; j < r; ++j) {
      d_qz_mean[j] += d_z[j];
      d_qz_lv[j] += d_z[j] * noise.z[k][j] * 0.5 * std::exp(0.5 * q_z.log_variance[j]);
    }
  }

  model.head(Head::kEncoder).backward(enc_tape, d_qz_mean, d_qz_lv, seg(Head::kEncoder));
  model.head(Head::kPriorZ).backward(pz_tape, d_pz_mean, d_pz_lv, seg(Head::kPriorZ));

  out.total = combine_loss(out.kl_z, out.kl_y, out.recon_nll, w);
  return out;
}

}  // namespace veli::model

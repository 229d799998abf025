#include "veli/synth/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "veli/error.hpp"

namespace veli::synth {

namespace {

// Stream tags keep the base, channel and row generators disjoint.
constexpr std::uint64_t kBaseStream = 0xB45E;
constexpr std::uint64_t kRowStream = 0x50A5;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("noise.") + name + " must lie in [0, 1]");
}

}  // namespace

std::string to_string(BaseKind k) {
  switch (k) {
    case BaseKind::kReferenceFile: return "reference_file";
    case BaseKind::kSinusoid: return "sinusoid";
    case BaseKind::kSawtooth: return "sawtooth";
    case BaseKind::kExponential: return "exponential";
  }
  return "sinusoid";
}

BaseKind base_kind_from_string(const std::string& name) {
  if (name == "reference_file" || name == "reference") return BaseKind::kReferenceFile;
  if (name == "sinusoid") return BaseKind::kSinusoid;
  if (name == "sawtooth") return BaseKind::kSawtooth;
  if (name == "exponential") return BaseKind::kExponential;
  throw ConfigError("base: unknown kind '" + name + "'");
}

void BaseSignalSpec::validate() const {
  if (kind == BaseKind::kReferenceFile) {
    if (reference.empty()) throw ConfigError("base.reference: reference series missing or empty");
    return;
  }
  if (!(max_value > offset)) throw ConfigError("base.max_value must exceed base.offset");
  if (!(period > 0.0)) throw ConfigError("base.period must be positive");
  if (!(rate > 0.0)) throw ConfigError("base.rate must be positive");
}

std::vector<double> gen_base(const BaseSignalSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == BaseKind::kReferenceFile) return spec.reference;
  std::vector<double> s(spec.length);
  const double span = spec.max_value - spec.offset;
  switch (spec.kind) {
    case BaseKind::kSinusoid:
      for (std::size_t t = 0; t < s.size(); ++t)
        s[t] = spec.offset + span * 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period));
      break;
    case BaseKind::kSawtooth:
      for (std::size_t t = 0; t < s.size(); ++t)
        s[t] = spec.offset + span * std::fmod(static_cast<double>(t), spec.period) / spec.period;
      break;
    case BaseKind::kExponential: {
      auto rng = make_stream(seed, kBaseStream, 0);
      std::exponential_distribution<double> exp(spec.rate);
      for (double& v : s) v = exp(rng);
      break;
    }
    case BaseKind::kReferenceFile: break;
  }
  return s;
}

void NoiseConfig::validate(std::size_t channels) const {
  check_probability(p_gaussian, "p_gaussian");
  check_probability(p_factor, "p_factor");
  check_probability(p_spike, "p_spike");
  check_probability(p_na, "p_na");
  if (!(gaussian_std >= 0.0) || !std::isfinite(gaussian_std)) throw ConfigError("noise.gaussian_std must be >= 0");
  if (!std::isfinite(gaussian_mean)) throw ConfigError("noise.gaussian_mean must be finite");
  if (!std::isfinite(factor)) throw ConfigError("noise.factor must be finite");
  if (!std::isfinite(spike_factor)) throw ConfigError("noise.spike_factor must be finite");
  if (max_na_per_row > channels)
    throw ConfigError("noise.max_na_per_row (" + std::to_string(max_na_per_row) + ") exceeds channel count " +
                      std::to_string(channels));
}

NoiseConfig NoiseConfig::moderate() {
  NoiseConfig c;
  c.gaussian_mean = 3.0;
  c.gaussian_std = 2.0;
  c.p_gaussian = 1.0;
  c.factor = 1.5;
  c.p_factor = 0.5;
  c.spike_factor = 10.0;
  c.p_spike = 0.1;
  c.p_na = 0.35;
  c.max_na_per_row = 5;
  return c;
}

NoiseConfig NoiseConfig::extreme() {
  NoiseConfig c;
  c.gaussian_mean = 5.0;
  c.gaussian_std = 2.0;
  c.p_gaussian = 1.0;
  c.factor = 2.0;
  c.p_factor = 0.7;
  c.spike_factor = 10.0;
  c.p_spike = 0.4;
  c.p_na = 0.4;
  c.max_na_per_row = 5;
  return c;
}

NoiseConfig NoiseConfig::preset(const std::string& name) {
  if (name == "moderate") return moderate();
  if (name == "extreme") return extreme();
  if (name == "none") return none();
  throw ConfigError("noise: unknown preset '" + name + "' (expected moderate, extreme or none)");
}

SyntheticLocation inject_noise(const std::vector<double>& base, const NoiseConfig& cfg,
                               std::size_t channels, std::uint64_t seed, Execution exec) {
  if (channels == 0) throw ConfigError("synth.channels must be positive");
  cfg.validate(channels);
  const std::size_t T = base.size();
  SyntheticLocation out{base, Matrix(T, channels), seed};
  std::vector<char> na_candidate(T * channels, 0);

  auto one_channel = [&](std::size_t c) {
    auto rng = make_stream(seed, 0, c);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(cfg.gaussian_mean, cfg.gaussian_std);
    for (std::size_t t = 0; t < T; ++t) {
      // Fixed draw count per point keeps streams aligned across configs.
      const double u_g = unif(rng), g = normal(rng), u_f = unif(rng), u_s = unif(rng), u_na = unif(rng);
      double v = base[t];
      if (u_g < cfg.p_gaussian) v += g;
      if (u_f < cfg.p_factor) v *= cfg.factor;
      if (u_s < cfg.p_spike) v *= cfg.spike_factor;
      out.channels(t, c) = v;
      na_candidate[t * channels + c] = u_na < cfg.p_na ? 1 : 0;
    }
  };
  const auto nc = static_cast<std::ptrdiff_t>(channels);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nc; ++c) one_channel(static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < nc; ++c) one_channel(static_cast<std::size_t>(c));
  }

  auto row_rng = make_stream(seed, kRowStream, 0);
  std::vector<std::size_t> picked;
  for (std::size_t t = 0; t < T; ++t) {
    picked.clear();
    for (std::size_t c = 0; c < channels; ++c)
      if (na_candidate[t * channels + c]) picked.push_back(c);
    if (picked.size() > cfg.max_na_per_row) {
      // Partial Fisher-Yates: the first max_na_per_row entries stay NA.
      for (std::size_t i = 0; i < cfg.max_na_per_row; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, picked.size() - 1);
        std::swap(picked[i], picked[pick(row_rng)]);
      }
      picked.resize(cfg.max_na_per_row);
    }
    for (std::size_t c : picked) out.channels(t, c) = kNA;
  }
  return out;
}

data::LocationDataset to_location(const SyntheticLocation& synth, std::string id) {
  data::LocationDataset loc;
  loc.id = std::move(id);
  loc.start_hour = kSynthStartHour;
  loc.readings = synth.channels;
  for (std::size_t c = 0; c < synth.channels.cols(); ++c) loc.sensor_ids.push_back("s" + std::to_string(c + 1));
  loc.reference = synth.base;
  return loc;
}

}  // namespace veli::synth

#include "veli/model/model_io.hpp"

#include <fstream>
#include <sstream>

#include "veli/error.hpp"
#include "veli/io/kv_file.hpp"
#include "veli/nn/checkpoint.hpp"

namespace veli::model {

namespace {

std::string join_exact(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += nn::format_exact(v[i]);
  }
  return s;
}

std::vector<double> split_exact(const std::string& s) {
  std::istringstream ss(s);
  std::vector<double> out;
  for (std::string tok; ss >> tok;) out.push_back(nn::parse_exact(tok));
  return out;
}

std::size_t parse_size(const std::string& s, const char* key) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw DataError(std::string("checkpoint metadata '") + key + "' is not an integer: " + s);
}

}  // namespace

void save_model(std::ostream& out, const VeliModel& model, const std::string& config_hash) {
  nn::Checkpoint ckpt;
  const auto& c = model.config();
  ckpt.set("format", "veli-model");
  ckpt.set("sensors", std::to_string(c.sensors));
  ckpt.set("latent", std::to_string(c.latent));
  ckpt.set("hidden", std::to_string(c.hidden));
  ckpt.set("samples", std::to_string(c.samples));
  ckpt.set("alpha", nn::format_exact(c.weights.alpha));
  ckpt.set("beta_z", nn::format_exact(c.weights.beta_z));
  ckpt.set("beta_y", nn::format_exact(c.weights.beta_y));
  ckpt.set("seed", std::to_string(model.seed()));
  ckpt.set("config_hash", config_hash.empty() ? "none" : config_hash);
  ckpt.set("stats_mean", join_exact(model.standardization().mean));
  ckpt.set("stats_scale", join_exact(model.standardization().scale));
  for (std::size_t h = 0; h < kHeadCount; ++h) {
    const std::string name = head_name(Head(h));
    const auto& head = model.head(Head(h));
    ckpt.nets.emplace_back(name + ".trunk", head.trunk());
    ckpt.nets.emplace_back(name + ".mean", head.mean_layer());
    ckpt.nets.emplace_back(name + ".log_variance", head.log_variance_layer());
  }
  nn::write_checkpoint(out, ckpt);
}

VeliModel load_model(std::istream& in) {
  const auto ckpt = nn::read_checkpoint(in);
  if (ckpt.require("format") != "veli-model") throw DataError("checkpoint does not hold a veli model");
  ModelConfig c;
  c.sensors = parse_size(ckpt.require("sensors"), "sensors");
  c.latent = parse_size(ckpt.require("latent"), "latent");
  c.hidden = parse_size(ckpt.require("hidden"), "hidden");
  c.samples = parse_size(ckpt.require("samples"), "samples");
  c.weights.alpha = nn::parse_exact(ckpt.require("alpha"));
  c.weights.beta_z = nn::parse_exact(ckpt.require("beta_z"));
  c.weights.beta_y = nn::parse_exact(ckpt.require("beta_y"));
  const auto seed = static_cast<std::uint64_t>(std::stoull(ckpt.require("seed")));
  data::ChannelStats stats{split_exact(ckpt.require("stats_mean")), split_exact(ckpt.require("stats_scale"))};

  std::array<GaussianHead, kHeadCount> heads;
  for (std::size_t h = 0; h < kHeadCount; ++h) {
    const std::string name = head_name(Head(h));
    heads[h] = GaussianHead(ckpt.net(name + ".trunk"), ckpt.net(name + ".mean"),
                            ckpt.net(name + ".log_variance"));
  }
  try {
    return VeliModel(c, std::move(heads), std::move(stats), seed);
  } catch (const ConfigError& e) {
    throw DataError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_model_file(const std::filesystem::path& path, const VeliModel& model,
                     const std::string& config_hash) {
  std::ostringstream ss;
  save_model(ss, model, config_hash);
  io::write_file_atomic(path, ss.str());
}

VeliModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model checkpoint " + path.string());
  return load_model(in);
}

}  // namespace veli::model

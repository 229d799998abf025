#include "cli_app.hpp"

#include <CLI11.hpp>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "veli/baselines/pca_denoise.hpp"
#include "veli/data/csv.hpp"
#include "veli/data/preprocess.hpp"
#include "veli/data/standardize.hpp"
#include "veli/error.hpp"
#include "veli/eval/experiments.hpp"
#include "veli/eval/report.hpp"
#include "veli/io/kv_file.hpp"
#include "veli/model/inference.hpp"
#include "veli/model/model_io.hpp"
#include "veli/model/trainer.hpp"
#include "veli/synth/synth.hpp"

namespace veli::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  bool verbose = false;
  bool serial = false;
};

struct ModelOpts {
  std::size_t latent = 4;
  std::size_t hidden = 32;
  std::size_t samples = 1;
  double alpha = 1.0;
  double beta_z = 10.0;
  double beta_y = 0.1;
  std::size_t epochs = 100;
  std::size_t batch = 64;
  double lr = 1e-6;
  double train_fraction = 0.8;
};

struct PreprocessOpts {
  std::string locations;
  std::vector<std::string> sensors;
  std::vector<std::string> refs;
  std::string id = "location";
  double lo = 0.0;
  double hi = 1000.0;
  bool no_scrub = false;
  double eps = 0.0;
  double eps_mad = 5.0;
  std::size_t min_pts = 24;
  std::size_t batch_hours = 1460;
  double keep_cluster_ratio = 0.5;
  std::size_t min_hours = 6000;
  std::size_t min_sensors = 1;
};

struct SynthOpts {
  std::string base = "sinusoid";
  std::string reference;
  double offset = 2.0;
  double max_value = 30.0;
  double period = 48.0;
  double rate = 1.0 / 12.0;
  std::size_t length = 4000;
  std::size_t channels = 10;
  std::string noise = "moderate";
  std::string id = "synthetic";
  double gaussian_mean = std::numeric_limits<double>::quiet_NaN();
  double gaussian_std = std::numeric_limits<double>::quiet_NaN();
  double p_gaussian = std::numeric_limits<double>::quiet_NaN();
  double factor = std::numeric_limits<double>::quiet_NaN();
  double p_factor = std::numeric_limits<double>::quiet_NaN();
  double spike_factor = std::numeric_limits<double>::quiet_NaN();
  double p_spike = std::numeric_limits<double>::quiet_NaN();
  double p_na = std::numeric_limits<double>::quiet_NaN();
  int max_na_per_row = -1;
};

struct TrainOpts {
  std::string input;
  ModelOpts model;
};

struct FinetuneOpts {
  std::string model;
  std::string input;
  std::size_t epochs = model::kDefaultFineTuneEpochs;
  std::size_t batch = 64;
  double lr = 1e-6;
  double train_fraction = 0.8;
};

struct InferOpts {
  std::string model;
  std::string input;
  bool sample_z = false;
};

struct EvalOpts {
  std::string input;
  std::string model;
  std::vector<std::string> methods{"veli", "kalman", "pca"};
  double train_fraction = 0.8;
  double pca_variance = 0.9;
  std::size_t pca_components = 0;
};

struct AblateOpts {
  std::string kind;
  std::string input;
  std::string model;
  std::vector<std::size_t> n{1, 3, 5, 7, 9};
  std::vector<std::size_t> sizes{3, 5, 7, 10};
  std::vector<std::string> scales;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  ModelOpts model_opts;
};

std::string exact(const std::string& v) { return v; }
std::string exact(double v) { return data::format_value(v); }
std::string exact(int v) { return v < 0 ? std::string() : std::to_string(v); }
template <std::unsigned_integral T>
std::string exact(T v) {
  return std::to_string(v);
}
template <typename T>
std::string exact(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if constexpr (std::is_same_v<T, std::string>) s += (i ? ", \"" : "\"") + v[i] + "\"";
    else s += (i ? ", " : "") + exact(v[i]);
  }
  return s + "]";
}

/// add_option with a round-trip exact default, so the manifest reproduces
/// the run bit for bit.
template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& var, const std::string& desc = "") {
  auto* o = app->add_option(name, var, desc);
  o->default_str(exact(var));
  return o;
}

std::string quote(const std::string& v) { return "\"" + v + "\""; }

/// INI text CLI11 reads back through --config: root options, then the active
/// subcommand's options in its own section.
std::string resolved_config(const CLI::App& app, const CLI::App& sub) {
  auto lines = [](const CLI::App& a) {
    std::string s;
    for (const CLI::Option* o : a.get_options()) {
      const std::string name = o->get_single_name();
      if (name.empty() || name == "help" || name == "config" || name == "version") continue;
      std::string value;
      if (o->get_expected_min() == 0) {
        value = o->count() > 0 && o->as<bool>() ? "true" : "false";
      } else if (o->count() > 0) {
        const auto& res = o->results();
        if (o->get_expected_max() > 1) {
          value = "[";
          for (std::size_t i = 0; i < res.size(); ++i) value += (i ? ", " : "") + quote(res[i]);
          value += "]";
        } else {
          value = quote(res.back());
        }
      } else {
        value = o->get_default_str();
        if (value.empty() || value == "[]") continue;  // unset; an empty list cannot be read back
        if (value.front() != '[') value = quote(value);
      }
      s += name + "=" + value + "\n";
    }
    return s;
  };
  return lines(app) + "[" + sub.get_name() + "]\n" + lines(sub);
}

Execution exec_of(const Common& c) { return c.serial ? Execution::kSerial : Execution::kParallel; }

void add_model_options(CLI::App* sub, ModelOpts& m) {
  opt(sub, "--latent", m.latent, "Latent dimension r (<= sensor count)");
  opt(sub, "--hidden", m.hidden, "Hidden width of every head");
  opt(sub, "--samples", m.samples, "Monte-Carlo samples K per snapshot");
  opt(sub, "--alpha", m.alpha, "Reconstruction weight");
  opt(sub, "--beta-z", m.beta_z, "KL weight on z");
  opt(sub, "--beta-y", m.beta_y, "KL weight on y");
  opt(sub, "--epochs", m.epochs, "Training epochs");
  opt(sub, "--batch", m.batch, "Batch size");
  opt(sub, "--lr", m.lr, "Adam learning rate");
  opt(sub, "--train-fraction", m.train_fraction, "Leading fraction of hours used for training");
}

eval::VeliFitConfig fit_config(const ModelOpts& m, const Common& c, std::ostream& err) {
  eval::VeliFitConfig cfg;
  cfg.model.latent = m.latent;
  cfg.model.hidden = m.hidden;
  cfg.model.samples = m.samples;
  cfg.model.weights = {m.alpha, m.beta_z, m.beta_y};
  cfg.model.weights.validate();
  cfg.train.epochs = m.epochs;
  cfg.train.batch_size = m.batch;
  cfg.train.learning_rate = m.lr;
  cfg.train.execution = exec_of(c);
  cfg.train.validate();
  if (c.verbose)
    cfg.train.on_epoch = [&err](std::size_t e, const model::LossBreakdown& l) {
      err << "epoch " << e + 1 << " total " << l.total << " kl_z " << l.kl_z << " kl_y " << l.kl_y << " recon "
          << l.recon_nll << '\n';
    };
  return cfg;
}

/// Training rows [0, f T); f = 1 uses everything.
data::LocationDataset train_part(const data::LocationDataset& loc, double f) {
  if (!(f > 0.0 && f <= 1.0)) throw ConfigError("train-fraction must lie in (0, 1]");
  if (f == 1.0) return loc;
  return data::chronological_split(loc, f).train;
}

/// Evaluation rows [f T, T); f = 0 uses everything.
data::LocationDataset test_part(const data::LocationDataset& loc, double f) {
  if (!(f >= 0.0 && f < 1.0)) throw ConfigError("train-fraction must lie in [0, 1) for evaluation");
  if (f == 0.0) return loc;
  return data::chronological_split(loc, f).test;
}

data::LocationDataset load_location(const std::string& path) {
  if (path.empty()) throw ConfigError("--input is required");
  return data::read_location_csv(path).location;
}

std::string history_csv(const model::TrainResult& r) {
  std::string s = "epoch,kl_z,kl_y,recon_nll,total\n";
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    const auto& h = r.history[e];
    s += std::to_string(e + 1) + "," + data::format_value(h.kl_z) + "," + data::format_value(h.kl_y) + "," +
         data::format_value(h.recon_nll) + "," + data::format_value(h.total) + "\n";
  }
  return s;
}

// ---- subcommands -----------------------------------------------------------

void run_preprocess(const PreprocessOpts& o, const Common& c, std::ostream& out) {
  struct Job {
    std::string id;
    std::vector<fs::path> sensors, refs;
  };
  std::vector<Job> jobs;
  if (!o.locations.empty()) {
    const auto kv = io::KeyValueFile::load(o.locations);
    const fs::path dir = fs::path(o.locations).parent_path();
    for (const auto& [key, value] : kv.entries()) {
      const auto dot = key.rfind('.');
      if (dot == std::string::npos) throw ConfigError("locations: key '" + key + "' must live in a [location] section");
      const std::string id = key.substr(0, dot), field = key.substr(dot + 1);
      auto it = std::find_if(jobs.begin(), jobs.end(), [&](const Job& j) { return j.id == id; });
      if (it == jobs.end()) {
        jobs.push_back({id, {}, {}});
        it = jobs.end() - 1;
      }
      const fs::path p = fs::path(value).is_absolute() ? fs::path(value) : dir / value;
      if (field == "sensor") it->sensors.push_back(p);
      else if (field == "ref") it->refs.push_back(p);
      else throw ConfigError("locations: unknown field '" + field + "' (expected sensor or ref)");
    }
  } else {
    Job j{o.id, {}, {}};
    for (const auto& s : o.sensors) j.sensors.emplace_back(s);
    for (const auto& r : o.refs) j.refs.emplace_back(r);
    jobs.push_back(std::move(j));
  }
  if (jobs.empty() || jobs.front().sensors.empty()) throw ConfigError("preprocess needs --sensor files or --locations");

  data::PreprocessConfig pc;
  pc.bounds = {o.lo, o.hi};
  pc.scrub = !o.no_scrub;
  pc.dbscan = {o.eps, o.eps_mad, o.min_pts, o.batch_hours, o.keep_cluster_ratio};
  data::PreprocessConfig ref_pc = pc;
  ref_pc.scrub = false;

  for (const auto& job : jobs) {
    std::vector<data::RawSeries> raw, raw_refs;
    for (const auto& p : job.sensors) raw.push_back(data::read_raw_csv(p));
    for (const auto& p : job.refs) raw_refs.push_back(data::read_raw_csv(p));
    const auto sensors = data::preprocess_sensors(raw, pc, exec_of(c));
    const auto refs = data::preprocess_sensors(raw_refs, ref_pc, exec_of(c));
    auto loc = data::build_location(sensors, refs, job.id);
    loc = data::eligibility_filter(loc, {o.min_hours, o.min_sensors});
    const auto path = fs::path(c.out) / (job.id + ".csv");
    data::write_location_csv(path, loc);
    out << "wrote " << path.string() << " (" << loc.hours() << " hours, " << loc.sensors() << " sensors)\n";
  }
}

void run_synth(const SynthOpts& o, const Common& c, std::ostream& out) {
  synth::BaseSignalSpec spec;
  spec.kind = synth::base_kind_from_string(o.base);
  spec.offset = o.offset;
  spec.max_value = o.max_value;
  spec.period = o.period;
  spec.rate = o.rate;
  spec.length = o.length;
  if (spec.kind == synth::BaseKind::kReferenceFile) {
    if (o.reference.empty()) throw ConfigError("--reference is required for base reference_file");
    const auto ref = data::read_location_csv(o.reference).location;
    spec.reference = ref.has_reference() ? ref.reference : ref.readings.column(0);
  }
  auto noise = synth::NoiseConfig::preset(o.noise);
  auto set = [](double v, double& field) {
    if (!std::isnan(v)) field = v;
  };
  set(o.gaussian_mean, noise.gaussian_mean);
  set(o.gaussian_std, noise.gaussian_std);
  set(o.p_gaussian, noise.p_gaussian);
  set(o.factor, noise.factor);
  set(o.p_factor, noise.p_factor);
  set(o.spike_factor, noise.spike_factor);
  set(o.p_spike, noise.p_spike);
  set(o.p_na, noise.p_na);
  if (o.max_na_per_row >= 0) noise.max_na_per_row = static_cast<std::size_t>(o.max_na_per_row);

  const auto base = synth::gen_base(spec, c.seed);
  const auto s = synth::inject_noise(base, noise, o.channels, c.seed, exec_of(c));
  const auto path = fs::path(c.out) / (o.id + ".csv");
  data::write_location_csv(path, synth::to_location(s, o.id));
  out << "wrote " << path.string() << " (" << base.size() << " hours, " << o.channels << " channels)\n";
}

void run_train(const TrainOpts& o, const Common& c, const std::string& config_hash, std::ostream& out,
               std::ostream& err) {
  const auto loc = load_location(o.input);
  auto cfg = fit_config(o.model, c, err);
  auto fit = eval::fit_veli(train_part(loc, o.model.train_fraction), cfg, c.seed);
  const auto dir = fs::path(c.out);
  model::save_model_file(dir / "model.ckpt", fit.model, config_hash);
  io::write_file_atomic(dir / "history.csv", history_csv(fit.result));
  out << "trained on " << fit.training_rows << " rows for " << fit.result.history.size() << " epochs\n";
}

void run_finetune(const FinetuneOpts& o, const Common& c, const std::string& config_hash, std::ostream& out,
                  std::ostream& err) {
  if (o.model.empty()) throw ConfigError("--model is required");
  auto m = model::load_model_file(o.model);
  const auto loc = load_location(o.input);
  if (loc.sensors() != m.sensors()) throw DimensionError("fine-tune input sensors", m.sensors(), loc.sensors());
  const auto part = train_part(loc, o.train_fraction);
  // The decoder stays frozen, so the stored standardization is kept as well.
  auto snaps = data::make_snapshots(part.readings, m.standardization(), part.start_hour);
  std::vector<model::SensorSnapshot> rows;
  for (auto& s : snaps)
    if (s.observed() > 0) rows.push_back(std::move(s));
  model::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.batch;
  tc.learning_rate = o.lr;
  tc.seed = c.seed;
  tc.execution = exec_of(c);
  if (c.verbose)
    tc.on_epoch = [&err](std::size_t e, const model::LossBreakdown& l) {
      err << "epoch " << e + 1 << " total " << l.total << '\n';
    };
  const auto result = model::fine_tune(m, rows, tc);
  const auto dir = fs::path(c.out);
  model::save_model_file(dir / "model.ckpt", m, config_hash);
  io::write_file_atomic(dir / "history.csv", history_csv(result));
  out << "fine-tuned encoder on " << rows.size() << " rows for " << result.history.size() << " epochs\n";
}

void run_infer(const InferOpts& o, const Common& c, std::ostream& out) {
  if (o.model.empty()) throw ConfigError("--model is required");
  const auto m = model::load_model_file(o.model);
  const auto loc = load_location(o.input);
  if (loc.sensors() != m.sensors()) throw DimensionError("infer input sensors", m.sensors(), loc.sensors());
  const auto snaps = data::make_snapshots(loc.readings, m.standardization(), loc.start_hour);
  std::vector<model::CorrectedReading> res;
  if (o.sample_z) {
    std::mt19937_64 rng(c.seed);
    for (const auto& s : snaps) res.push_back(model::infer_sampled(m, s, rng));
  } else {
    res = model::infer_batch(m, snaps, exec_of(c));
  }
  data::Corrections corr{Matrix(loc.hours(), loc.sensors()), Matrix(loc.hours(), loc.sensors())};
  for (std::size_t t = 0; t < res.size(); ++t)
    for (std::size_t j = 0; j < loc.sensors(); ++j) {
      corr.y_hat(t, j) = res[t].y_hat[j];
      corr.y_std(t, j) = res[t].y_std[j];
    }
  const auto path = fs::path(c.out) / (fs::path(o.input).stem().string() + "_corrected.csv");
  data::write_location_csv(path, loc, &corr);
  out << "wrote " << path.string() << '\n';
}

void print_summary(std::ostream& out, const eval::EvalReport& r) {
  out << r.method << ": mae_raw_mean " << r.mae_raw_mean << " mae_method " << r.mae_method
      << (r.recovered() ? "" : " (not recovered)") << '\n';
}

void run_eval(const EvalOpts& o, const Common& c, std::ostream& out) {
  const auto loc = load_location(o.input);
  const auto test = test_part(loc, o.train_fraction);
  for (const auto& method : o.methods) {
    eval::EvalReport r;
    if (method == "veli") {
      if (o.model.empty()) throw ConfigError("--model is required for method veli");
      r = eval::evaluate_veli(model::load_model_file(o.model), test, exec_of(c));
    } else if (method == "kalman") {
      r = eval::evaluate_kalman(test);
    } else if (method == "pca") {
      r = eval::evaluate_pca(test, {o.pca_components, o.pca_variance});
    } else {
      throw ConfigError("eval: unknown method '" + method + "' (expected veli, kalman or pca)");
    }
    eval::write_report(fs::path(c.out) / ("report_" + method + ".txt"), r);
    print_summary(out, r);
  }
}

eval::WeightScale parse_scale(const std::string& s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("ablate --scales: bad entry '" + s + "' (expected alpha:beta_z:beta_y)");
    }
  }
  if (parts.size() != 3) throw ConfigError("ablate --scales: bad entry '" + s + "' (expected alpha:beta_z:beta_y)");
  return {parts[0], parts[1], parts[2]};
}

void run_ablate(const AblateOpts& o, const Common& c, std::ostream& out, std::ostream& err) {
  const auto loc = load_location(o.input);
  const auto split = data::chronological_split(loc, o.model_opts.train_fraction);
  const auto cfg = fit_config(o.model_opts, c, err);
  const fs::path dir(c.out);
  eval::EvalReport summary;
  summary.location_id = loc.id;
  summary.method = "veli";
  summary.add("ablation", o.kind);

  if (o.kind == "na_injection") {
    if (o.model.empty()) throw ConfigError("--model is required for na_injection");
    const auto m = model::load_model_file(o.model);
    eval::Table t{"na_injection", {"n", "mae_raw_mean", "mae_method"}, {}};
    for (std::size_t n : o.n) {
      const auto r = eval::run_na_injection(m, split.test, n, c.seed, exec_of(c));
      t.rows.push_back({static_cast<double>(n), r.mae_raw_mean, r.mae_method});
      out << "n=" << n << " mae " << r.mae_method << '\n';
    }
    summary.tables.push_back(std::move(t));
  } else if (o.kind == "sensor_subset") {
    const auto res = eval::run_sensor_subset(split.train, split.test, o.sizes, cfg, c.seed);
    eval::Table t{"sensor_subset", {"sensors", "training_rows", "mae_raw_mean", "mae_method"}, {}};
    for (const auto& r : res) {
      t.rows.push_back({static_cast<double>(r.sensors), static_cast<double>(r.training_rows), r.report.mae_raw_mean,
                        r.report.mae_method});
      out << "s=" << r.sensors << " mae " << r.report.mae_method << '\n';
    }
    summary.tables.push_back(std::move(t));
  } else if (o.kind == "loss_weight_sweep") {
    std::vector<eval::WeightScale> grid;
    for (const auto& s : o.scales) grid.push_back(parse_scale(s));
    if (grid.empty()) grid = eval::default_sweep_grid();
    const auto res = eval::run_loss_weight_sweep(split.train, split.test, grid, cfg, c.seed);
    eval::Table t{"loss_weight_sweep", {"alpha", "beta_z", "beta_y", "mae_raw_mean", "mae_method"}, {}};
    for (const auto& p : res) {
      t.rows.push_back({p.weights.alpha, p.weights.beta_z, p.weights.beta_y, p.report.mae_raw_mean,
                        p.report.mae_method});
      out << "weights " << p.weights.alpha << "/" << p.weights.beta_z << "/" << p.weights.beta_y << " mae "
          << p.report.mae_method << '\n';
    }
    summary.tables.push_back(std::move(t));
  } else if (o.kind == "seeds") {
    eval::Table t{"seeds", {"seed", "mae_raw_mean", "mae_method"}, {}};
    const auto stats = eval::seed_repeat(
        [&](std::uint64_t seed) {
          const auto fit = eval::fit_veli(split.train, cfg, seed);
          const auto r = eval::evaluate_veli(fit.model, split.test, exec_of(c));
          t.rows.push_back({static_cast<double>(seed), r.mae_raw_mean, r.mae_method});
          summary.mae_raw_mean = r.mae_raw_mean;
          return r.mae_method;
        },
        o.seeds);
    summary.mae_method = stats.mean;
    summary.seed_stats = stats;
    summary.tables.push_back(std::move(t));
    out << "mae " << stats.mean << " +- " << stats.std << " over " << stats.count << " seeds\n";
  } else {
    throw ConfigError("ablate --kind must be na_injection, sensor_subset, loss_weight_sweep or seeds");
  }
  eval::write_report(dir / ("ablation_" + o.kind + ".txt"), summary);
}

/// Resolved configuration, excluding output location, hashed for the manifest.
std::string hash_config(const std::string& config) {
  std::string filtered;
  std::istringstream in(config);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("out=", 0) != 0) filtered += line + '\n';
  return io::fnv1a_hex(filtered);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-free correction of low-cost PM2.5 sensor readings", "veli"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kCodeVersion);

  Common c;
  app.set_config("--config", "", "Read options from a configuration file (INI/TOML; flags override)");
  opt(&app, "--seed", c.seed, "Random seed");
  opt(&app, "--out", c.out, "Output directory")->required();
  app.add_flag("--verbose", c.verbose, "Print per-epoch losses");
  app.add_flag("--serial", c.serial, "Use the serial reference kernels");

  PreprocessOpts pre;
  auto* s_pre = app.add_subcommand("preprocess", "Resample, validate, scrub and align raw sensor files");
  opt(s_pre, "--locations", pre.locations, "Key-value file: [id] sections with sensor = / ref = paths");
  opt(s_pre, "--sensor", pre.sensors, "Raw sensor CSV (timestamp,value); repeatable");
  opt(s_pre, "--ref", pre.refs, "Raw reference CSV; repeatable");
  opt(s_pre, "--id", pre.id, "Location id when --sensor is used");
  opt(s_pre, "--lo", pre.lo, "Lower physical bound");
  opt(s_pre, "--hi", pre.hi, "Upper physical bound");
  s_pre->add_flag("--no-scrub", pre.no_scrub, "Skip DBSCAN scrubbing");
  opt(s_pre, "--dbscan-eps", pre.eps, "DBSCAN radius; 0 = multiplier x MAD per batch");
  opt(s_pre, "--dbscan-mad-multiplier", pre.eps_mad, "Automatic radius multiplier");
  opt(s_pre, "--dbscan-min-pts", pre.min_pts, "DBSCAN core-point support");
  opt(s_pre, "--dbscan-batch-hours", pre.batch_hours, "Batch length in hours");
  opt(s_pre, "--keep-cluster-ratio", pre.keep_cluster_ratio, "Minor cluster cut-off relative to largest");
  opt(s_pre, "--min-hours", pre.min_hours, "Observed hours a sensor needs");
  opt(s_pre, "--min-sensors", pre.min_sensors, "Sensors a location needs");

  SynthOpts syn;
  auto* s_syn = app.add_subcommand("synth", "Generate a noisy synthetic location");
  opt(s_syn, "--base", syn.base, "sinusoid | sawtooth | exponential | reference_file");
  opt(s_syn, "--reference", syn.reference, "Location CSV whose ref (or first) column is the base");
  opt(s_syn, "--offset", syn.offset);
  opt(s_syn, "--max-value", syn.max_value);
  opt(s_syn, "--period", syn.period, "Hours");
  opt(s_syn, "--rate", syn.rate, "Exponential rate");
  opt(s_syn, "--length", syn.length, "Hours");
  opt(s_syn, "--channels", syn.channels);
  opt(s_syn, "--noise", syn.noise, "Noise preset: moderate | extreme | none");
  opt(s_syn, "--id", syn.id, "Output file stem");
  opt(s_syn, "--gaussian-mean", syn.gaussian_mean, "Override preset");
  opt(s_syn, "--gaussian-std", syn.gaussian_std, "Override preset");
  opt(s_syn, "--p-gaussian", syn.p_gaussian, "Override preset");
  opt(s_syn, "--factor", syn.factor, "Override preset");
  opt(s_syn, "--p-factor", syn.p_factor, "Override preset");
  opt(s_syn, "--spike-factor", syn.spike_factor, "Override preset");
  opt(s_syn, "--p-spike", syn.p_spike, "Override preset");
  opt(s_syn, "--p-na", syn.p_na, "Override preset");
  opt(s_syn, "--max-na-per-row", syn.max_na_per_row, "Override preset");

  TrainOpts tr;
  auto* s_tr = app.add_subcommand("train", "Train a model on a location CSV");
  opt(s_tr, "--input", tr.input, "Location CSV")->required();
  add_model_options(s_tr, tr.model);

  FinetuneOpts ft;
  auto* s_ft = app.add_subcommand("finetune", "Retrain only the encoder of a trained model");
  opt(s_ft, "--model", ft.model, "Checkpoint")->required();
  opt(s_ft, "--input", ft.input, "Location CSV")->required();
  opt(s_ft, "--epochs", ft.epochs);
  opt(s_ft, "--batch", ft.batch);
  opt(s_ft, "--lr", ft.lr);
  opt(s_ft, "--train-fraction", ft.train_fraction);

  InferOpts inf;
  auto* s_inf = app.add_subcommand("infer", "Write corrected readings with one-sigma bands");
  opt(s_inf, "--model", inf.model, "Checkpoint")->required();
  opt(s_inf, "--input", inf.input, "Location CSV")->required();
  s_inf->add_flag("--sample-z", inf.sample_z, "Decode from a sampled latent instead of the encoder mean");

  EvalOpts ev;
  auto* s_ev = app.add_subcommand("eval", "Score methods against the reference column");
  opt(s_ev, "--input", ev.input, "Location CSV with a ref column")->required();
  opt(s_ev, "--model", ev.model, "Checkpoint (method veli)");
  opt(s_ev, "--method", ev.methods, "veli | kalman | pca; repeatable");
  opt(s_ev, "--train-fraction", ev.train_fraction, "Leading hours excluded from scoring");
  opt(s_ev, "--pca-variance", ev.pca_variance);
  opt(s_ev, "--pca-components", ev.pca_components, "0 = choose by variance");

  AblateOpts ab;
  auto* s_ab = app.add_subcommand("ablate", "NA injection, sensor subsets, loss-weight sweep or seed repeats");
  opt(s_ab, "--kind", ab.kind, "na_injection | sensor_subset | loss_weight_sweep | seeds")->required();
  opt(s_ab, "--input", ab.input, "Location CSV with a ref column")->required();
  opt(s_ab, "--model", ab.model, "Checkpoint (na_injection)");
  opt(s_ab, "--n", ab.n, "NA count per row");
  opt(s_ab, "--sizes", ab.sizes, "Sensor subset sizes");
  opt(s_ab, "--scales", ab.scales, "alpha:beta_z:beta_y multipliers; default 3x3 balanced grid");
  opt(s_ab, "--seeds", ab.seeds);
  add_model_options(s_ab, ab.model_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kCodeVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const std::string config = resolved_config(app, *sub);
    const std::string hash = hash_config(config);
    fs::create_directories(c.out);
    const std::string name = sub->get_name();
    if (name == "preprocess") run_preprocess(pre, c, out);
    else if (name == "synth") run_synth(syn, c, out);
    else if (name == "train") run_train(tr, c, hash, out, err);
    else if (name == "finetune") run_finetune(ft, c, hash, out, err);
    else if (name == "infer") run_infer(inf, c, out);
    else if (name == "eval") run_eval(ev, c, out);
    else if (name == "ablate") run_ablate(ab, c, out, err);

    std::string manifest = "# veli run manifest\n# subcommand = " + name + "\n# code_version = " + kCodeVersion +
                           "\n# config_hash = " + hash + "\n" + config;
    io::write_file_atomic(fs::path(c.out) / "manifest.ini", manifest);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace veli::cli

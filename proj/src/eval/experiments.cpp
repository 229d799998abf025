#include "veli/eval/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "veli/baselines/knn_imputer.hpp"
#include "veli/data/csv.hpp"
#include "veli/data/standardize.hpp"
#include "veli/error.hpp"
#include "veli/model/inference.hpp"

namespace veli::eval {

namespace {

std::size_t observed_in_row(const Matrix& m, std::size_t r) {
  std::size_t n = 0;
  for (double v : m.row(r)) n += is_na(v) ? 0 : 1;
  return n;
}

}  // namespace

FittedVeli fit_veli(const data::LocationDataset& train, const VeliFitConfig& cfg, std::uint64_t seed) {
  model::ModelConfig mc = cfg.model;
  mc.sensors = train.sensors();
  mc.validate();
  auto stats = data::standardize_fit(train.readings);
  auto all = data::make_snapshots(train.readings, stats, train.start_hour);
  std::vector<model::SensorSnapshot> rows;
  const std::size_t need = std::max<std::size_t>(1, cfg.min_observed);
  for (std::size_t r = 0; r < all.size(); ++r)
    if (observed_in_row(train.readings, r) >= need) rows.push_back(std::move(all[r]));
  if (rows.empty()) throw DataError("location " + train.id + ": no training row has enough observed channels");

  FittedVeli fit{model::VeliModel(mc, seed), {}, rows.size()};
  fit.model.set_standardization(std::move(stats));
  model::TrainConfig tc = cfg.train;
  tc.seed = seed;
  fit.result = model::train(fit.model, rows, tc);
  return fit;
}

std::vector<double> veli_fused(const model::VeliModel& model, const Matrix& readings, Execution exec) {
  const auto snaps = data::make_snapshots(readings, model.standardization());
  const auto out = model::infer_batch(model, snaps, exec);
  std::vector<double> fused(out.size());
  for (std::size_t t = 0; t < out.size(); ++t) fused[t] = out[t].fused();
  return fused;
}

EvalReport evaluate_series(const data::LocationDataset& location, const std::string& method,
                           const std::vector<double>& fused) {
  if (!location.has_reference()) throw DataError("location " + location.id + " has no reference series");
  EvalReport r;
  r.location_id = location.id;
  r.method = method;
  const auto raw = row_mean(location.readings.data(), location.sensors());
  r.mae_raw_mean = mae(raw, location.reference);
  r.mae_method = mae(fused, location.reference);
  const auto grid = default_epsilon_grid();
  r.hit_rate = hit_rate_curve(fused, location.reference, grid);
  try {
    r.autocorr = autocorrelation(fused);
  } catch (const DataError&) {
    r.autocorr.assign(48, 0.0);
    r.add("autocorr_note", "constant series");
  }
  r.add("hours", static_cast<double>(location.hours()));
  r.add("sensors", static_cast<double>(location.sensors()));
  return r;
}

EvalReport evaluate_veli(const model::VeliModel& model, const data::LocationDataset& location, Execution exec) {
  return evaluate_series(location, "veli", veli_fused(model, location.readings, exec));
}

EvalReport evaluate_kalman(const data::LocationDataset& location) {
  const auto imputed = baselines::knn_impute(location.readings, 5);
  const auto fused = baselines::kalman_denoise(imputed, baselines::default_kalman_config(imputed));
  return evaluate_series(location, "kalman", fused);
}

EvalReport evaluate_pca(const data::LocationDataset& location, const baselines::PcaConfig& cfg) {
  const auto imputed = baselines::knn_impute(location.readings, 5);
  const auto res = baselines::pca_denoise(imputed, cfg);
  auto r = evaluate_series(location, "pca", res.fused);
  r.add("pca_components", static_cast<double>(res.components));
  return r;
}

NaInjection inject_na(const Matrix& readings, std::size_t n, std::uint64_t seed) {
  const std::size_t d = readings.cols();
  if (n >= d) throw ConfigError("ablation.n (" + std::to_string(n) + ") must be below the sensor count " + std::to_string(d));
  NaInjection out{readings, std::vector<std::vector<std::size_t>>(readings.rows())};
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(d);
  for (std::size_t t = 0; t < readings.rows(); ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(perm[i], perm[pick(rng)]);
      out.readings(t, perm[i]) = kNA;
    }
    out.forced[t].assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(out.forced[t].begin(), out.forced[t].end());
  }
  return out;
}

EvalReport run_na_injection(const model::VeliModel& model, const data::LocationDataset& location,
                            std::size_t n, std::uint64_t seed, Execution exec) {
  if (model.sensors() != location.sensors())
    throw DimensionError("na-injection location sensors", model.sensors(), location.sensors());
  data::LocationDataset injected = location;
  injected.readings = inject_na(location.readings, n, seed).readings;
  auto r = evaluate_series(location, "veli", veli_fused(model, injected.readings, exec));
  r.add("na_injected_per_row", static_cast<double>(n));
  return r;
}

std::vector<SubsetResult> run_sensor_subset(const data::LocationDataset& train,
                                            const data::LocationDataset& test,
                                            const std::vector<std::size_t>& sizes,
                                            const VeliFitConfig& cfg, std::uint64_t seed) {
  for (std::size_t s : sizes)
    if (s == 0 || s > train.sensors() || s > test.sensors())
      throw ConfigError("ablation subset size " + std::to_string(s) + " is not between 1 and the sensor count");
  std::vector<SubsetResult> out;
  for (std::size_t s : sizes) {
    std::vector<std::size_t> channels(s);
    std::iota(channels.begin(), channels.end(), std::size_t{0});
    VeliFitConfig c = cfg;
    c.model.latent = std::min(cfg.model.latent, s);
    c.min_observed = std::max<std::size_t>(cfg.min_observed, s / 2);
    const auto sub_test = test.select_channels(channels);
    auto fit = fit_veli(train.select_channels(channels), c, seed);
    auto report = evaluate_veli(fit.model, sub_test);
    report.add("subset_size", static_cast<double>(s));
    out.push_back({s, fit.training_rows, std::move(report)});
  }
  return out;
}

std::vector<WeightScale> default_sweep_grid() {
  std::vector<WeightScale> g;
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0}) g.push_back({a, b, b});
  return g;
}

std::vector<SweepPoint> run_loss_weight_sweep(const data::LocationDataset& train,
                                              const data::LocationDataset& test,
                                              const std::vector<WeightScale>& grid,
                                              const VeliFitConfig& cfg, std::uint64_t seed) {
  const model::LossWeights base = cfg.model.weights;
  for (const auto& s : grid) {
    if (!(s.beta_y > 0.0))
      throw ConfigError("loss weight beta_y must be positive (requested scale " + data::format_value(s.beta_y) +
                        "); beta_y = 0 makes training diverge");
    if (!(s.alpha > 0.0) || !(s.beta_z > 0.0)) throw ConfigError("loss weight scales must be positive");
  }
  std::vector<SweepPoint> out;
  for (const auto& s : grid) {
    VeliFitConfig c = cfg;
    c.model.weights = {base.alpha * s.alpha, base.beta_z * s.beta_z, base.beta_y * s.beta_y};
    auto fit = fit_veli(train, c, seed);
    auto report = evaluate_veli(fit.model, test);
    report.add("alpha", c.model.weights.alpha);
    report.add("beta_z", c.model.weights.beta_z);
    report.add("beta_y", c.model.weights.beta_y);
    out.push_back({s, c.model.weights, std::move(report)});
  }
  return out;
}

MeanStd seed_repeat(const std::function<double(std::uint64_t)>& experiment, const std::vector<std::uint64_t>& seeds) {
  std::vector<double> values;
  for (auto s : seeds) values.push_back(experiment(s));
  return mean_std(values);
}

}  // namespace veli::eval

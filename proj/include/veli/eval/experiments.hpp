#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "veli/baselines/kalman.hpp"
#include "veli/baselines/pca_denoise.hpp"
#include "veli/data/timeseries.hpp"
#include "veli/eval/report.hpp"
#include "veli/model/trainer.hpp"
#include "veli/model/veli_model.hpp"

namespace veli::eval {

struct VeliFitConfig {
  model::ModelConfig model;  // model.sensors is taken from the data
  model::TrainConfig train;
  /// Training rows need at least this many observed channels (and always one).
  std::size_t min_observed = 1;
};

struct FittedVeli {
  model::VeliModel model;
  model::TrainResult result;
  std::size_t training_rows = 0;
};

/// Standardizes on `train`, drops rows below min_observed and trains a fresh
/// model seeded with `seed` (cfg.train.seed is overridden by it).
FittedVeli fit_veli(const data::LocationDataset& train, const VeliFitConfig& cfg, std::uint64_t seed);

/// Fused corrected series (channel mean of the decoder mean) for every row.
std::vector<double> veli_fused(const model::VeliModel& model, const Matrix& readings,
                               Execution exec = Execution::kParallel);

/// MAE, hit rate and autocorrelation of `fused` against the location's
/// reference, next to the MAE of the raw channel mean.
EvalReport evaluate_series(const data::LocationDataset& location, const std::string& method,
                           const std::vector<double>& fused);

EvalReport evaluate_veli(const model::VeliModel& model, const data::LocationDataset& location,
                         Execution exec = Execution::kParallel);
/// KNN imputation (k = 5) followed by the Kalman / PCA baseline.
EvalReport evaluate_kalman(const data::LocationDataset& location);
EvalReport evaluate_pca(const data::LocationDataset& location, const baselines::PcaConfig& cfg = {});

struct NaInjection {
  Matrix readings;
  std::vector<std::vector<std::size_t>> forced;  // channels forced to NA, per row
};

/// Forces exactly n distinct uniformly chosen channels of every row to NA.
/// Throws ConfigError if n >= d.
NaInjection inject_na(const Matrix& readings, std::size_t n, std::uint64_t seed);

EvalReport run_na_injection(const model::VeliModel& model, const data::LocationDataset& location,
                            std::size_t n, std::uint64_t seed, Execution exec = Execution::kParallel);

struct SubsetResult {
  std::size_t sensors = 0;
  std::size_t training_rows = 0;
  EvalReport report;
};

/// For each size s: first s channels, rows with fewer than floor(s/2)
/// observed channels dropped from training, fresh model with d = s and
/// r = min(r, s), evaluated on `test`.
std::vector<SubsetResult> run_sensor_subset(const data::LocationDataset& train,
                                            const data::LocationDataset& test,
                                            const std::vector<std::size_t>& sizes,
                                            const VeliFitConfig& cfg, std::uint64_t seed);

struct WeightScale {
  double alpha = 1.0;
  double beta_z = 1.0;
  double beta_y = 1.0;

  friend bool operator==(const WeightScale&, const WeightScale&) = default;
};

/// {0.5, 1, 2} for alpha crossed with {0.5, 1, 2} applied to both betas.
std::vector<WeightScale> default_sweep_grid();

struct SweepPoint {
  WeightScale scale;
  model::LossWeights weights;
  EvalReport report;
};

/// Retrains with the default weights multiplied by each scale. A non-positive
/// beta_y scale is rejected with ConfigError before any training starts.
std::vector<SweepPoint> run_loss_weight_sweep(const data::LocationDataset& train,
                                              const data::LocationDataset& test,
                                              const std::vector<WeightScale>& grid,
                                              const VeliFitConfig& cfg, std::uint64_t seed);

inline const std::vector<std::uint64_t> kDefaultSeeds{1, 2, 3, 4, 5};

/// Runs experiment(seed) for each seed; mean and sample std of the results.
MeanStd seed_repeat(const std::function<double(std::uint64_t)>& experiment,
                    const std::vector<std::uint64_t>& seeds = kDefaultSeeds);

}  // namespace veli::eval

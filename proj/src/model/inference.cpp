#include "veli/model/inference.hpp"

#include <cmath>
#include <numeric>

#include "veli/error.hpp"

namespace veli::model {

double CorrectedReading::fused() const {
  if (y_hat.empty()) throw DataError("empty corrected reading");
  return std::accumulate(y_hat.begin(), y_hat.end(), 0.0) / static_cast<double>(y_hat.size());
}

namespace {

CorrectedReading decode(const VeliModel& model, const SensorSnapshot& snap, std::vector<double> z) {
  std::vector<double> input;
  input.reserve(z.size() + 2 * snap.x.size());
  input.insert(input.end(), z.begin(), z.end());
  input.insert(input.end(), snap.x.begin(), snap.x.end());
  input.insert(input.end(), snap.mask.begin(), snap.mask.end());
  const auto q_y = model.head(Head::kDecoder).forward(input);
  const auto& stats = model.standardization();
  CorrectedReading out;
  out.y_hat = data::destandardize(q_y.mean, stats);
  out.y_std.resize(q_y.size());
  for (std::size_t i = 0; i < q_y.size(); ++i)
    out.y_std[i] = stats.scale[i] * std::exp(0.5 * q_y.log_variance[i]);
  out.z_mean = std::move(z);
  return out;
}

std::vector<double> encoder_input(const SensorSnapshot& snap) {
  std::vector<double> in(snap.x);
  in.insert(in.end(), snap.mask.begin(), snap.mask.end());
  return in;
}

}  // namespace

CorrectedReading infer(const VeliModel& model, const SensorSnapshot& snap) {
  model.check_snapshot(snap);
  auto q_z = model.head(Head::kEncoder).forward(encoder_input(snap));
  return decode(model, snap, std::move(q_z.mean));
}

CorrectedReading infer_sampled(const VeliModel& model, const SensorSnapshot& snap,
                               std::mt19937_64& rng) {
  model.check_snapshot(snap);
  const auto q_z = model.head(Head::kEncoder).forward(encoder_input(snap));
  return decode(model, snap, reparam_sample(q_z, rng));
}

std::vector<CorrectedReading> infer_batch(const VeliModel& model,
                                          std::span<const SensorSnapshot> snaps, Execution exec) {
  for (const auto& s : snaps) model.check_snapshot(s);
  std::vector<CorrectedReading> out(snaps.size());
  const auto n = static_cast<std::ptrdiff_t>(snaps.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = infer(model, snaps[i]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = infer(model, snaps[i]);
  }
  return out;
}

}  // namespace veli::model

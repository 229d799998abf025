#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "veli/baselines/knn_imputer.hpp"
#include "veli/data/standardize.hpp"
#include "veli/model/batch_gradient.hpp"
#include "veli/synth/synth.hpp"

using namespace veli;

namespace {

Matrix noisy_readings(std::size_t hours) {
  synth::BaseSignalSpec s;
  s.length = hours;
  return synth::inject_noise(synth::gen_base(s, 1), synth::NoiseConfig::moderate(), 10, 2).channels;
}

Execution mode(const benchmark::State& state) {
  return state.range(1) ? Execution::kParallel : Execution::kSerial;
}

void BM_BatchGradient(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix readings = noisy_readings(batch);
  const auto snaps = data::make_snapshots(readings, data::standardize_fit(readings));
  model::ModelConfig mc;
  mc.sensors = 10;
  const model::VeliModel m(mc, 3);
  std::vector<std::size_t> idx(batch);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(5);
  std::vector<model::SampleNoise> noise;
  for (std::size_t i = 0; i < batch; ++i) noise.push_back(model::draw_noise(m, 1, rng));
  for (auto _ : state) benchmark::DoNotOptimize(model::batch_gradient(m, snaps, idx, noise, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

void BM_KnnImpute(benchmark::State& state) {
  const Matrix readings = noisy_readings(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(baselines::knn_impute(readings, 5, mode(state)));
}

void BM_InjectNoise(benchmark::State& state) {
  synth::BaseSignalSpec s;
  s.length = static_cast<std::size_t>(state.range(0));
  const auto base = synth::gen_base(s, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(synth::inject_noise(base, synth::NoiseConfig::extreme(), 10, 4, mode(state)));
}

}  // namespace

BENCHMARK(BM_BatchGradient)->ArgsProduct({{64, 1024}, {0, 1}})->ArgNames({"batch", "parallel"})->UseRealTime();
BENCHMARK(BM_KnnImpute)->ArgsProduct({{1000, 4000}, {0, 1}})->ArgNames({"hours", "parallel"})->UseRealTime();
BENCHMARK(BM_InjectNoise)->ArgsProduct({{100000}, {0, 1}})->ArgNames({"hours", "parallel"})->UseRealTime();

BENCHMARK_MAIN();

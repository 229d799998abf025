#include "veli/model/batch_gradient.hpp"

#include <algorithm>

#include "veli/error.hpp"

#ifdef VELI_HAVE_OPENMP
#include <omp.h>
#endif

namespace veli {

int parallel_threads() noexcept {
#ifdef VELI_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace veli

namespace veli::model {

namespace {

void accumulate(BatchGradient& out, const LossBreakdown& l, std::span<const double> g) {
  out.mean_loss.kl_z += l.kl_z;
  out.mean_loss.kl_y += l.kl_y;
  out.mean_loss.recon_nll += l.recon_nll;
  out.mean_loss.total += l.total;
  for (std::size_t p = 0; p < g.size(); ++p) out.grad[p] += g[p];
}

void finish(BatchGradient& out, std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  out.mean_loss.kl_z *= inv;
  out.mean_loss.kl_y *= inv;
  out.mean_loss.recon_nll *= inv;
  out.mean_loss.total *= inv;
  for (double& g : out.grad) g *= inv;
}

// Samples are summed in fixed chunks, then chunk sums in order. Both paths use
// the same grouping, so results do not depend on the execution mode or thread
// count, and memory stays at one buffer per chunk.
constexpr std::size_t kChunk = 16;

struct ChunkSum {
  LossBreakdown loss;
  std::vector<double> grad;
};

ChunkSum chunk_sum(const VeliModel& model, std::span<const SensorSnapshot> data, std::span<const std::size_t> indices,
                   std::span<const SampleNoise> noise, std::size_t chunk, std::vector<double>& scratch) {
  ChunkSum out{{}, std::vector<double>(model.param_count(), 0.0)};
  const std::size_t end = std::min(indices.size(), (chunk + 1) * kChunk);
  for (std::size_t j = chunk * kChunk; j < end; ++j) {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    const auto l = loss_gradient(model, data[indices[j]], noise[j], scratch);
    out.loss.kl_z += l.kl_z;
    out.loss.kl_y += l.kl_y;
    out.loss.recon_nll += l.recon_nll;
    out.loss.total += l.total;
    for (std::size_t p = 0; p < scratch.size(); ++p) out.grad[p] += scratch[p];
  }
  return out;
}

BatchGradient reduce(std::vector<ChunkSum>& chunks, std::size_t n_params, std::size_t n) {
  BatchGradient out{{}, std::vector<double>(n_params, 0.0)};
  for (const auto& c : chunks) accumulate(out, c.loss, c.grad);
  finish(out, n);
  return out;
}

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

BatchGradient serial(const VeliModel& model, std::span<const SensorSnapshot> data,
                     std::span<const std::size_t> indices, std::span<const SampleNoise> noise) {
  const std::size_t n_params = model.param_count();
  std::vector<double> scratch(n_params);
  std::vector<ChunkSum> chunks;
  for (std::size_t c = 0; c < chunk_count(indices.size()); ++c)
    chunks.push_back(chunk_sum(model, data, indices, noise, c, scratch));
  return reduce(chunks, n_params, indices.size());
}

BatchGradient parallel(const VeliModel& model, std::span<const SensorSnapshot> data,
                       std::span<const std::size_t> indices, std::span<const SampleNoise> noise) {
  const std::size_t n_params = model.param_count();
  std::vector<ChunkSum> chunks(chunk_count(indices.size()));
  bool failed = false;
  std::string failure;
  const auto count = static_cast<std::ptrdiff_t>(chunks.size());
#pragma omp parallel
  {
    std::vector<double> scratch(n_params);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      try {
        chunks[static_cast<std::size_t>(c)] =
            chunk_sum(model, data, indices, noise, static_cast<std::size_t>(c), scratch);
      } catch (const std::exception& e) {
#pragma omp critical(veli_batch_gradient_error)
        {
          failed = true;
          failure = e.what();
        }
      }
    }
  }
  if (failed) throw ConfigError(failure);
  return reduce(chunks, n_params, indices.size());
}

}  // namespace

BatchGradient batch_gradient(const VeliModel& model, std::span<const SensorSnapshot> data,
                             std::span<const std::size_t> indices, std::span<const SampleNoise> noise,
                             Execution exec) {
  if (indices.empty()) throw DataError("empty batch");
  if (noise.size() != indices.size()) throw DimensionError("batch noise", indices.size(), noise.size());
  for (auto i : indices)
  {
    if (i >= data.size()) throw DataError("batch index " + std::to_string(i) + " out of range");
    model.check_snapshot(data[i]);
  }
  return exec == Execution::kParallel ? parallel(model, data, indices, noise)
                                      : serial(model, data, indices, noise);
}

}  // namespace veli::model

#pragma once

namespace veli {

/// Selects between an OpenMP kernel and its serial reference. Both variants
/// of every kernel produce bitwise-identical results.
enum class Execution { kSerial, kParallel };

/// Number of worker threads the parallel kernels will use (1 without OpenMP).
int parallel_threads() noexcept;

}  // namespace veli

#pragma once

#include <iosfwd>

namespace veli::cli {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Runs one command line. Returns the process exit code: 0 success,
/// 1 configuration error, 2 data error, 3 numerical abort.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace veli::cli

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veli/nn/dense_net.hpp"

namespace veli::nn {

/// Versioned text container for network parameters plus free-form metadata.
///
/// Layout (one record per line, fields separated by single spaces):
///
///     veli-checkpoint 1
///     meta <key> <value...>            zero or more, in insertion order
///     net <name> <layer_count>
///     layer <in> <out> <activation>    then `out` lines "w <in hexfloats>"
///     b <out hexfloats>
///     end
///
/// Reals are written as C99 hexadecimal floats so a write/read cycle is exact.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, DenseNet>> nets;

  void set(const std::string& key, std::string value);
  std::optional<std::string> get(const std::string& key) const;
  /// Throws DataError when the key is absent.
  const std::string& require(const std::string& key) const;
  const DenseNet& net(const std::string& name) const;
};

std::string format_exact(double v);
double parse_exact(const std::string& token);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace veli::nn

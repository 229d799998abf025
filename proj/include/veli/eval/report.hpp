#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veli/eval/metrics.hpp"

namespace veli::eval {

/// A method counts as recovering the signal when its MAE is at most this
/// fraction of the raw channel-mean MAE.
inline constexpr double kRecoveryRatio = 0.9;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

struct EvalReport {
  std::string location_id;
  std::string method;
  double mae_raw_mean = 0.0;
  double mae_method = 0.0;
  std::vector<HitRatePoint> hit_rate;
  std::vector<double> autocorr;
  std::optional<MeanStd> seed_stats;
  std::vector<std::pair<std::string, std::string>> extra;
  std::vector<Table> tables;

  bool recovered() const noexcept { return mae_method <= kRecoveryRatio * mae_raw_mean; }
  void add(std::string key, std::string value) { extra.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value);
};

/// Key-value header followed by CSV tables:
///
///   location = utrecht
///   mae_method = 5.25
///   [table hit_rate]
///   epsilon,fraction
///   0,0.012
///   [end]
///
/// Numbers print with full round-trip precision.
std::string format_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);
void write_report(const std::filesystem::path& path, const EvalReport& report);

}  // namespace veli::eval

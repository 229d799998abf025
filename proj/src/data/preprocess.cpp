#include "veli/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "veli/data/dbscan.hpp"
#include "veli/error.hpp"

namespace veli::data {

HourlySeries resample_hourly(const RawSeries& raw) {
  raw.validate();
  if (raw.samples.empty()) return HourlySeries{raw.sensor_id, 0, {}};
  return resample_hourly(raw, hour_of(raw.samples.front().unix_seconds),
                         hour_of(raw.samples.back().unix_seconds) + 1);
}

HourlySeries resample_hourly(const RawSeries& raw, HourIndex start_hour, HourIndex end_hour) {
  raw.validate();
  if (end_hour < start_hour) throw DataError("resample grid ends before it starts");
  const auto n = static_cast<std::size_t>(end_hour - start_hour);
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (const auto& s : raw.samples) {
    if (is_na(s.value)) continue;
    const HourIndex h = hour_of(s.unix_seconds);
    if (h < start_hour || h >= end_hour) continue;
    const auto i = static_cast<std::size_t>(h - start_hour);
    sum[i] += s.value;
    ++count[i];
  }
  HourlySeries out{raw.sensor_id, start_hour, std::vector<double>(n, kNA)};
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] > 0) out.values[i] = sum[i] / static_cast<double>(count[i]);
  return out;
}

RawSeries to_raw(const HourlySeries& series) {
  RawSeries raw{series.sensor_id, {}};
  for (std::size_t i = 0; i < series.values.size(); ++i)
    if (!is_na(series.values[i]))
      raw.samples.push_back({(series.start_hour + static_cast<HourIndex>(i)) * 3600, series.values[i]});
  return raw;
}

void Bounds::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ConfigError("bounds must be finite with lo < hi");
}

HourlySeries range_validate(const HourlySeries& series, const Bounds& bounds) {
  bounds.validate();
  HourlySeries out = series;
  for (double& v : out.values)
    if (!is_na(v) && (v < bounds.lo || v > bounds.hi)) v = kNA;
  return out;
}

void DbscanConfig::validate() const {
  if (eps < 0.0 || !std::isfinite(eps)) throw ConfigError("dbscan.eps must be >= 0 (0 = automatic)");
  if (eps == 0.0 && !(eps_mad_multiplier > 0.0)) throw ConfigError("dbscan.eps_mad_multiplier must be positive");
  if (min_pts < 1) throw ConfigError("dbscan.min_pts must be at least 1");
  if (batch_hours < 1) throw ConfigError("dbscan.batch_hours must be at least 1");
  if (keep_cluster_ratio < 0.0 || keep_cluster_ratio > 1.0)
    throw ConfigError("dbscan.keep_cluster_ratio must lie in [0, 1]");
}

HourlySeries dbscan_scrub(const HourlySeries& series, const DbscanConfig& cfg) {
  cfg.validate();
  HourlySeries out = series;
  const std::size_t T = series.values.size();
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  for (std::size_t begin = 0; begin < T; begin += cfg.batch_hours) {
    const std::size_t end = std::min(T, begin + cfg.batch_hours);
    idx.clear();
    vals.clear();
    for (std::size_t t = begin; t < end; ++t)
      if (!is_na(series.values[t])) {
        idx.push_back(t);
        vals.push_back(series.values[t]);
      }
    if (vals.size() < cfg.min_pts) continue;

    double eps = cfg.eps;
    if (eps == 0.0) {
      eps = cfg.eps_mad_multiplier * median_absolute_deviation(vals);
      if (!(eps > 0.0)) eps = 1e-9 * std::max(1.0, std::abs(vals.front()));
    }
    const auto labels = dbscan_1d(vals, eps, cfg.min_pts);
    std::map<int, std::size_t> sizes;
    for (int l : labels)
      if (l != kDbscanNoise) ++sizes[l];
    std::size_t largest = 0;
    for (const auto& [l, c] : sizes) largest = std::max(largest, c);
    const double keep_min = cfg.keep_cluster_ratio * static_cast<double>(largest);
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const int l = labels[j];
      const bool scrub = l == kDbscanNoise || static_cast<double>(sizes[l]) < keep_min;
      if (scrub) out.values[idx[j]] = kNA;
    }
  }
  return out;
}

std::vector<HourlySeries> preprocess_sensors(const std::vector<RawSeries>& raw,
                                             const PreprocessConfig& cfg, Execution exec) {
  cfg.bounds.validate();
  cfg.dbscan.validate();
  for (const auto& r : raw) r.validate();
  std::vector<HourlySeries> out(raw.size());
  auto one = [&](std::size_t i) {
    HourlySeries s = range_validate(resample_hourly(raw[i]), cfg.bounds);
    out[i] = cfg.scrub ? dbscan_scrub(s, cfg.dbscan) : std::move(s);
  };
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  return out;
}

LocationDataset build_location(const std::vector<HourlySeries>& sensors,
                               const std::vector<HourlySeries>& refs, std::string id) {
  if (sensors.empty()) throw DataError("location " + id + " has no sensors");
  HourIndex start = std::numeric_limits<HourIndex>::max();
  HourIndex end = std::numeric_limits<HourIndex>::min();
  for (const auto& s : sensors) {
    if (s.values.empty()) continue;
    start = std::min(start, s.start_hour);
    end = std::max(end, s.end_hour());
  }
  if (start > end) start = end = 0;  // every sensor empty

  LocationDataset loc;
  loc.id = std::move(id);
  loc.start_hour = start;
  const auto T = static_cast<std::size_t>(end - start);
  loc.readings = Matrix(T, sensors.size());
  for (std::size_t c = 0; c < sensors.size(); ++c) {
    loc.sensor_ids.push_back(sensors[c].sensor_id.empty() ? "s" + std::to_string(c + 1) : sensors[c].sensor_id);
    for (std::size_t t = 0; t < T; ++t) loc.readings(t, c) = sensors[c].at(start + static_cast<HourIndex>(t));
  }
  if (!refs.empty()) {
    loc.reference.assign(T, kNA);
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : refs) {
        const double v = r.at(start + static_cast<HourIndex>(t));
        if (!is_na(v)) {
          sum += v;
          ++n;
        }
      }
      if (n > 0) loc.reference[t] = sum / static_cast<double>(n);
    }
  }
  return loc;
}

LocationDataset eligibility_filter(const LocationDataset& location, const EligibilityConfig& cfg) {
  std::vector<std::size_t> keep;
  std::vector<std::size_t> counts(location.sensors(), 0);
  for (std::size_t c = 0; c < location.sensors(); ++c) {
    for (std::size_t t = 0; t < location.hours(); ++t) counts[c] += is_na(location.readings(t, c)) ? 0 : 1;
    if (counts[c] >= cfg.min_hours) keep.push_back(c);
  }
  if (keep.size() < cfg.min_sensors) {
    std::ostringstream msg;
    msg << "location " << location.id << ": " << keep.size() << " sensor(s) with >= " << cfg.min_hours
        << " observed hours, need " << cfg.min_sensors << "; counts:";
    for (std::size_t c = 0; c < counts.size(); ++c)
      msg << ' ' << (c < location.sensor_ids.size() ? location.sensor_ids[c] : std::to_string(c)) << '=' << counts[c];
    throw DataError(msg.str());
  }
  return location.select_channels(keep);
}

Split chronological_split(const LocationDataset& location, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(location.hours())));
  return {location.slice(0, cut), location.slice(cut, location.hours())};
}

}  // namespace veli::data

#include "veli/data/timeseries.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "veli/error.hpp"

namespace veli::data {

namespace {

bool digits(const std::string& s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return false;
  for (std::size_t i = pos; i < pos + n; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

int number(const std::string& s, std::size_t pos, std::size_t n) { return std::stoi(s.substr(pos, n)); }

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
  using namespace std::chrono;
  const std::string& s = text;
  auto fail = [&]() -> std::int64_t { throw DataError("malformed timestamp '" + text + "'"); };
  if (!digits(s, 0, 4) || s.size() < 10 || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' || !digits(s, 8, 2))
    return fail();
  const year_month_day ymd{year{number(s, 0, 4)}, month{static_cast<unsigned>(number(s, 5, 2))},
                           day{static_cast<unsigned>(number(s, 8, 2))}};
  if (!ymd.ok()) return fail();
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!digits(s, pos + 1, 2)) return fail();
    hh = number(s, pos + 1, 2);
    pos += 3;
    if (pos < s.size() && s[pos] == ':') {
      if (!digits(s, pos + 1, 2)) return fail();
      mm = number(s, pos + 1, 2);
      pos += 3;
      if (pos < s.size() && s[pos] == ':') {
        if (!digits(s, pos + 1, 2)) return fail();
        ss = number(s, pos + 1, 2);
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {  // fractional seconds are truncated
          ++pos;
          while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
      }
    }
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  else if (pos + 6 == s.size() && s.substr(pos) == "+00:00") pos += 6;
  if (pos != s.size()) return fail();
  if (hh > 23 || mm > 59 || ss > 60) return fail();
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_hour(HourIndex hour) {
  using namespace std::chrono;
  const HourIndex day_index = hour >= 0 ? hour / 24 : (hour - 23) / 24;
  const int hh = static_cast<int>(hour - day_index * 24);
  const year_month_day ymd{sys_days{days{day_index}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh);
  return buf;
}

HourIndex hour_of(std::int64_t unix_seconds) noexcept {
  return unix_seconds >= 0 ? unix_seconds / 3600 : (unix_seconds - 3599) / 3600;
}

void RawSeries::validate() const {
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].unix_seconds <= samples[i - 1].unix_seconds)
      throw DataError("sensor " + sensor_id + ": timestamps not strictly increasing at sample " +
                      std::to_string(i));
}

std::size_t HourlySeries::observed_count() const noexcept {
  std::size_t n = 0;
  for (double v : values) n += is_na(v) ? 0 : 1;
  return n;
}

double HourlySeries::at(HourIndex hour) const noexcept {
  if (hour < start_hour || hour >= end_hour()) return kNA;
  return values[static_cast<std::size_t>(hour - start_hour)];
}

bool operator==(const HourlySeries& a, const HourlySeries& b) {
  if (a.sensor_id != b.sensor_id || a.start_hour != b.start_hour || a.values.size() != b.values.size())
    return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (is_na(a.values[i]) != is_na(b.values[i])) return false;
    if (!is_na(a.values[i]) && a.values[i] != b.values[i]) return false;
  }
  return true;
}

Matrix LocationDataset::mask() const {
  Matrix m(readings.rows(), readings.cols(), 0.0);
  for (std::size_t r = 0; r < readings.rows(); ++r)
    for (std::size_t c = 0; c < readings.cols(); ++c) m(r, c) = is_na(readings(r, c)) ? 0.0 : 1.0;
  return m;
}

LocationDataset LocationDataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > hours()) throw DataError("row slice out of range");
  LocationDataset out;
  out.id = id;
  out.start_hour = start_hour + static_cast<HourIndex>(begin);
  out.sensor_ids = sensor_ids;
  out.readings = Matrix(end - begin, sensors());
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t c = 0; c < sensors(); ++c) out.readings(r - begin, c) = readings(r, c);
  if (has_reference()) out.reference.assign(reference.begin() + static_cast<std::ptrdiff_t>(begin),
                                             reference.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

LocationDataset LocationDataset::select_channels(const std::vector<std::size_t>& channels) const {
  LocationDataset out;
  out.id = id;
  out.start_hour = start_hour;
  out.reference = reference;
  out.readings = Matrix(hours(), channels.size());
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const auto c = channels[j];
    if (c >= sensors()) throw DataError("channel " + std::to_string(c) + " out of range");
    out.sensor_ids.push_back(c < sensor_ids.size() ? sensor_ids[c] : "s" + std::to_string(c + 1));
    for (std::size_t r = 0; r < hours(); ++r) out.readings(r, j) = readings(r, c);
  }
  return out;
}

}  // namespace veli::data

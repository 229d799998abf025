#include "veli/data/csv.hpp"

#include <charconv>
#include <cstdio>
#include <map>

#include "veli/error.hpp"
#include "veli/io/kv_file.hpp"

namespace veli::data {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN") return kNA;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
  return v;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace

std::string format_value(double v) {
  if (is_na(v)) return {};
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

LocationCsv parse_location_csv(std::string_view text, std::string id) {
  enum class Kind { kSensor, kRef, kYhat, kYstd };
  std::vector<Kind> kinds;
  std::vector<std::size_t> channel_of;
  std::vector<std::string> sensor_names;
  std::size_t yhat_count = 0, ystd_count = 0;
  bool has_ref = false, header_seen = false;
  std::map<HourIndex, std::vector<double>> rows;

  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto cells = split_line(line);
    if (!header_seen) {
      header_seen = true;
      if (cells.empty() || trim(cells[0]) != "timestamp")
        throw DataError("line 1: header must start with 'timestamp'");
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const std::string name(trim(cells[i]));
        if (name == "ref") {
          if (has_ref) throw DataError("line 1: duplicate 'ref' column");
          has_ref = true;
          kinds.push_back(Kind::kRef);
          channel_of.push_back(0);
        } else if (name.rfind("yhat_", 0) == 0) {
          kinds.push_back(Kind::kYhat);
          channel_of.push_back(yhat_count++);
        } else if (name.rfind("ystd_", 0) == 0) {
          kinds.push_back(Kind::kYstd);
          channel_of.push_back(ystd_count++);
        } else {
          if (name.empty()) throw DataError("line 1: empty column name");
          kinds.push_back(Kind::kSensor);
          channel_of.push_back(sensor_names.size());
          sensor_names.push_back(name);
        }
      }
      if (sensor_names.empty()) throw DataError("line 1: no sensor columns");
      if (yhat_count != ystd_count || (yhat_count != 0 && yhat_count != sensor_names.size()))
        throw DataError("line 1: yhat/ystd columns must match the sensor count");
      return;
    }
    if (cells.size() != kinds.size() + 1)
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(kinds.size() + 1) +
                      " cells, got " + std::to_string(cells.size()));
    const HourIndex h = hour_of(parse_timestamp(std::string(trim(cells[0]))));
    if (!rows.empty() && h <= rows.rbegin()->first)
      throw DataError("line " + std::to_string(line_no) + ": timestamps must be strictly increasing by hour");
    std::vector<double> vals(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) vals[i] = parse_cell(cells[i + 1], line_no);
    rows.emplace(h, std::move(vals));
  });
  if (!header_seen) throw DataError("empty CSV");

  LocationCsv out;
  auto& loc = out.location;
  loc.id = std::move(id);
  loc.sensor_ids = sensor_names;
  const std::size_t d = sensor_names.size();
  const HourIndex start = rows.empty() ? 0 : rows.begin()->first;
  const auto T = rows.empty() ? std::size_t{0} : static_cast<std::size_t>(rows.rbegin()->first - start + 1);
  loc.start_hour = start;
  loc.readings = Matrix(T, d, kNA);
  if (has_ref) loc.reference.assign(T, kNA);
  if (yhat_count > 0) out.corrections = Corrections{Matrix(T, d, kNA), Matrix(T, d, kNA)};
  for (const auto& [h, vals] : rows) {
    const auto t = static_cast<std::size_t>(h - start);
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      switch (kinds[i]) {
        case Kind::kSensor: loc.readings(t, channel_of[i]) = vals[i]; break;
        case Kind::kRef: loc.reference[t] = vals[i]; break;
        case Kind::kYhat: out.corrections->y_hat(t, channel_of[i]) = vals[i]; break;
        case Kind::kYstd: out.corrections->y_std(t, channel_of[i]) = vals[i]; break;
      }
    }
  }
  return out;
}

LocationCsv read_location_csv(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  return parse_location_csv(text, path.stem().string());
}

std::string format_location_csv(const LocationDataset& loc, const Corrections* corrections) {
  const std::size_t d = loc.sensors(), T = loc.hours();
  if (corrections && (corrections->y_hat.rows() != T || corrections->y_hat.cols() != d ||
                      corrections->y_std.rows() != T || corrections->y_std.cols() != d))
    throw DimensionError("correction matrix rows", T, corrections->y_hat.rows());
  std::string out = "timestamp";
  for (std::size_t c = 0; c < d; ++c)
    out += "," + (c < loc.sensor_ids.size() ? loc.sensor_ids[c] : "s" + std::to_string(c + 1));
  if (loc.has_reference()) out += ",ref";
  if (corrections) {
    for (std::size_t c = 0; c < d; ++c) out += ",yhat_" + std::to_string(c + 1);
    for (std::size_t c = 0; c < d; ++c) out += ",ystd_" + std::to_string(c + 1);
  }
  out += '\n';
  for (std::size_t t = 0; t < T; ++t) {
    out += format_hour(loc.start_hour + static_cast<HourIndex>(t));
    for (std::size_t c = 0; c < d; ++c) out += "," + format_value(loc.readings(t, c));
    if (loc.has_reference()) out += "," + format_value(loc.reference[t]);
    if (corrections) {
      for (std::size_t c = 0; c < d; ++c) out += "," + format_value(corrections->y_hat(t, c));
      for (std::size_t c = 0; c < d; ++c) out += "," + format_value(corrections->y_std(t, c));
    }
    out += '\n';
  }
  return out;
}

void write_location_csv(const std::filesystem::path& path, const LocationDataset& location,
                        const Corrections* corrections) {
  io::write_file_atomic(path, format_location_csv(location, corrections));
}

RawSeries parse_raw_csv(std::string_view text, std::string sensor_id) {
  RawSeries raw{std::move(sensor_id), {}};
  bool header = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto cells = split_line(line);
    if (!header) {
      header = true;
      if (cells.size() != 2 || trim(cells[0]) != "timestamp")
        throw DataError("line 1: raw sensor header must be 'timestamp,value'");
      return;
    }
    if (cells.size() != 2) throw DataError("line " + std::to_string(line_no) + ": expected 2 cells");
    const auto ts = parse_timestamp(std::string(trim(cells[0])));
    if (!raw.samples.empty() && ts <= raw.samples.back().unix_seconds)
      throw DataError("line " + std::to_string(line_no) + ": timestamps must be strictly increasing");
    raw.samples.push_back({ts, parse_cell(cells[1], line_no)});
  });
  return raw;
}

RawSeries read_raw_csv(const std::filesystem::path& path, std::string sensor_id) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  return parse_raw_csv(text, sensor_id.empty() ? path.stem().string() : std::move(sensor_id));
}

}  // namespace veli::data

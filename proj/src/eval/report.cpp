#include "veli/eval/report.hpp"

#include <sstream>

#include "veli/data/csv.hpp"
#include "veli/error.hpp"
#include "veli/io/kv_file.hpp"

namespace veli::eval {

namespace {

std::string num(double v) {
  const auto s = data::format_value(v);
  return s.empty() ? "NA" : s;
}

double parse_num(const std::string& s) {
  if (s == "NA") return kNA;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataError("report: bad number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw DataError("report: bad number '" + s + "'");
  } catch (const std::out_of_range&) {
    throw DataError("report: number out of range '" + s + "'");
  }
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void EvalReport::add(std::string key, double value) { add(std::move(key), num(value)); }

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "location = " << r.location_id << '\n';
  out << "method = " << r.method << '\n';
  out << "mae_raw_mean = " << num(r.mae_raw_mean) << '\n';
  out << "mae_method = " << num(r.mae_method) << '\n';
  out << "recovered = " << (r.recovered() ? "true" : "false") << '\n';
  if (r.seed_stats) {
    out << "seed_mean = " << num(r.seed_stats->mean) << '\n';
    out << "seed_std = " << num(r.seed_stats->std) << '\n';
    out << "seed_count = " << r.seed_stats->count << '\n';
  }
  for (const auto& [k, v] : r.extra) out << k << " = " << v << '\n';

  auto table = [&](const Table& t) {
    out << "[table " << t.name << "]\n" << csv_row(t.columns) << '\n';
    for (const auto& row : t.rows) {
      std::vector<std::string> cells;
      for (double v : row) cells.push_back(num(v));
      out << csv_row(cells) << '\n';
    }
    out << "[end]\n";
  };
  if (!r.hit_rate.empty()) {
    Table t{"hit_rate", {"epsilon", "fraction"}, {}};
    for (const auto& p : r.hit_rate) t.rows.push_back({p.epsilon, p.fraction});
    table(t);
  }
  if (!r.autocorr.empty()) {
    Table t{"autocorr", {"lag", "value"}, {}};
    for (std::size_t i = 0; i < r.autocorr.size(); ++i) t.rows.push_back({static_cast<double>(i + 1), r.autocorr[i]});
    table(t);
  }
  for (const auto& t : r.tables) table(t);
  return out.str();
}

EvalReport parse_report(const std::string& text) {
  EvalReport r;
  std::istringstream in(text);
  std::string line;
  std::optional<Table> open;
  std::optional<double> seed_mean, seed_std;
  std::size_t seed_count = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (open) {
      if (line == "[end]") {
        if (open->name == "hit_rate") {
          for (const auto& row : open->rows) r.hit_rate.push_back({row.at(0), row.at(1)});
        } else if (open->name == "autocorr") {
          for (const auto& row : open->rows) r.autocorr.push_back(row.at(1));
        } else {
          r.tables.push_back(std::move(*open));
        }
        open.reset();
      } else if (open->columns.empty()) {
        open->columns = split(line);
      } else {
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(parse_num(c));
        if (row.size() != open->columns.size()) throw DataError("report: ragged table " + open->name);
        open->rows.push_back(std::move(row));
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("[table ", 0) == 0 && line.back() == ']') {
      open = Table{line.substr(7, line.size() - 8), {}, {}};
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw DataError("report: malformed line '" + line + "'");
    const auto key = line.substr(0, eq), value = line.substr(eq + 3);
    if (key == "location") r.location_id = value;
    else if (key == "method") r.method = value;
    else if (key == "mae_raw_mean") r.mae_raw_mean = parse_num(value);
    else if (key == "mae_method") r.mae_method = parse_num(value);
    else if (key == "recovered") continue;  // derived
    else if (key == "seed_mean") seed_mean = parse_num(value);
    else if (key == "seed_std") seed_std = parse_num(value);
    else if (key == "seed_count") seed_count = std::stoul(value);
    else r.extra.emplace_back(key, value);
  }
  if (open) throw DataError("report: unterminated table " + open->name);
  if (seed_mean) r.seed_stats = MeanStd{*seed_mean, seed_std.value_or(0.0), seed_count};
  return r;
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  io::write_file_atomic(path, format_report(report));
}

}  // namespace veli::eval

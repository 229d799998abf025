#include "veli/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "veli/error.hpp"
#include "veli/matrix.hpp"

namespace veli::eval {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> ref) {
  if (pred.size() != ref.size()) throw DimensionError("prediction length", ref.size(), pred.size());
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> ref) {
  check_lengths(pred, ref);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (is_na(pred[t]) || is_na(ref[t])) continue;
    sum += std::abs(pred[t] - ref[t]);
    ++n;
  }
  if (n == 0) throw DataError("mae: no hour where prediction and reference are both observed");
  return sum / static_cast<double>(n);
}

std::vector<double> default_epsilon_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(0.25 * i);
  return g;
}

std::vector<HitRatePoint> hit_rate_curve(std::span<const double> pred, std::span<const double> ref,
                                         std::span<const double> epsilons) {
  check_lengths(pred, ref);
  std::vector<double> err;
  for (std::size_t t = 0; t < pred.size(); ++t)
    if (!is_na(pred[t]) && !is_na(ref[t])) err.push_back(std::abs(pred[t] - ref[t]));
  if (err.empty()) throw DataError("hit_rate_curve: no hour where prediction and reference are both observed");
  std::sort(err.begin(), err.end());
  std::vector<HitRatePoint> out;
  for (double e : epsilons) {
    const auto within = std::upper_bound(err.begin(), err.end(), e) - err.begin();
    out.push_back({e, static_cast<double>(within) / static_cast<double>(err.size())});
  }
  return out;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  double m = 0.0;
  std::size_t n = 0;
  for (double v : series)
    if (!is_na(v)) {
      m += v;
      ++n;
    }
  if (n > 0) m /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series)
    if (!is_na(v)) var += (v - m) * (v - m);
  if (n < 2 || !(var > 0.0)) throw DataError("autocorrelation: constant series");

  std::vector<double> out(max_lag, 0.0);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    if (lag >= series.size()) break;
    double sa = 0.0, sb = 0.0;
    std::size_t np = 0;
    for (std::size_t t = 0; t + lag < series.size(); ++t) {
      const double a = series[t], b = series[t + lag];
      if (is_na(a) || is_na(b)) continue;
      sa += a;
      sb += b;
      ++np;
    }
    if (np < 2) continue;
    const double ma = sa / static_cast<double>(np), mb = sb / static_cast<double>(np);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t t = 0; t + lag < series.size(); ++t) {
      const double a = series[t], b = series[t + lag];
      if (is_na(a) || is_na(b)) continue;
      sab += (a - ma) * (b - mb);
      saa += (a - ma) * (a - ma);
      sbb += (b - mb) * (b - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) continue;
    out[lag - 1] = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  r.count = values.size();
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::vector<double> row_mean(std::span<const double> row_major, std::size_t cols) {
  if (cols == 0) return {};
  const std::size_t rows = row_major.size() / cols;
  std::vector<double> out(rows, kNA);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = row_major[r * cols + c];
      if (!is_na(v)) {
        sum += v;
        ++n;
      }
    }
    if (n > 0) out[r] = sum / static_cast<double>(n);
  }
  return out;
}

std::vector<double> isotonic_increasing(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t n;
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1) {
      const auto& b = blocks[blocks.size() - 1];
      const auto& a = blocks[blocks.size() - 2];
      if (a.sum / static_cast<double>(a.n) <= b.sum / static_cast<double>(b.n)) break;
      const Block merged{a.sum + b.sum, a.n + b.n};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.n, b.sum / static_cast<double>(b.n));
  return out;
}

std::size_t count_descents(std::span<const double> values) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) n += values[i + 1] < values[i] ? 1 : 0;
  return n;
}

std::vector<HistogramBin> histogram(std::span<const double> values) {
  std::vector<double> s;
  for (double v : values)
    if (!is_na(v)) s.push_back(v);
  if (s.empty()) return {};
  std::sort(s.begin(), s.end());
  const double lo = s.front(), hi = s.back();
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) bins = std::min<std::size_t>(10000, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  bins = std::max<std::size_t>(bins, 1);
  const double w = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + w * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? (hi > lo ? hi : lo + 1.0) : lo + w * static_cast<double>(b + 1);
  }
  for (double v : s) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

std::vector<double> block_average(std::span<const double> series, std::size_t block) {
  if (block == 0) throw ConfigError("block_average: block must be positive");
  std::vector<double> out;
  for (std::size_t begin = 0; begin < series.size(); begin += block) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = begin; t < std::min(series.size(), begin + block); ++t)
      if (!is_na(series[t])) {
        sum += series[t];
        ++n;
      }
    out.push_back(n > 0 ? sum / static_cast<double>(n) : kNA);
  }
  return out;
}

}  // namespace veli::eval

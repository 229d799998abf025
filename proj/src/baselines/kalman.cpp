#include "veli/baselines/kalman.hpp"

#include <algorithm>
#include <cmath>

#include "veli/error.hpp"

namespace veli::baselines {

namespace {

constexpr double kVarianceFloor = 1e-12;

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

void KalmanConfig::validate(std::size_t channels) const {
  if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("kalman.q must be positive");
  if (r.size() != channels) throw DimensionError("kalman.r entries", channels, r.size());
  for (double e : r)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("kalman.r entries must be positive");
  if (!(initial_variance > 0.0)) throw ConfigError("kalman.initial_variance must be positive");
  if (!std::isfinite(initial_mean)) throw ConfigError("kalman.initial_mean must be finite");
}

KalmanConfig default_kalman_config(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) throw DataError("kalman: empty input");
  KalmanConfig cfg;
  cfg.q = std::max(kVarianceFloor, 0.01 * sample_variance(x.data()));
  for (std::size_t c = 0; c < x.cols(); ++c) cfg.r.push_back(std::max(kVarianceFloor, sample_variance(x.column(c))));
  const auto first = x.row(0);
  double m = 0.0;
  for (double v : first) m += v;
  cfg.initial_mean = m / static_cast<double>(first.size());
  cfg.initial_variance = std::max(cfg.q, sample_variance(std::vector<double>(first.begin(), first.end())));
  return cfg;
}

std::vector<double> kalman_denoise(const Matrix& x, const KalmanConfig& cfg) {
  cfg.validate(x.cols());
  for (std::size_t i = 0; i < x.data().size(); ++i)
    if (!std::isfinite(x.data()[i]))
      throw DataError("kalman_denoise: non-finite value at row " + std::to_string(i / x.cols()) + ", column " +
                      std::to_string(i % x.cols()));
  double info_r = 0.0;
  for (double r : cfg.r) info_r += 1.0 / r;

  std::vector<double> out(x.rows());
  double mean = cfg.initial_mean, var = cfg.initial_variance;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    var += cfg.q;
    double weighted = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) weighted += x(t, c) / cfg.r[c];
    const double post_var = 1.0 / (1.0 / var + info_r);
    mean = post_var * (mean / var + weighted);
    var = post_var;
    out[t] = mean;
  }
  return out;
}

}  // namespace veli::baselines

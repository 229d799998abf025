#include "veli/baselines/pca_denoise.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "veli/error.hpp"

namespace veli::baselines {

void PcaConfig::validate(std::size_t channels) const {
  if (components > channels)
    throw ConfigError("pca.components (" + std::to_string(components) + ") exceeds channel count " +
                      std::to_string(channels));
  if (components == 0 && !(variance_fraction > 0.0 && variance_fraction <= 1.0))
    throw ConfigError("pca.variance_fraction must lie in (0, 1]");
}

PcaResult pca_denoise(const Matrix& x, const PcaConfig& cfg) {
  const std::size_t T = x.rows(), d = x.cols();
  cfg.validate(d);
  if (T <= d) throw DataError("pca_denoise needs more rows than channels");
  for (double v : x.data())
    if (!std::isfinite(v)) throw DataError("pca_denoise: input contains NA or non-finite values");

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> X(x.data().data(), static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(T - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);

  // Eigen sorts ascending; flip to descending.
  const Eigen::VectorXd values = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

  PcaResult res;
  for (Eigen::Index i = 0; i < values.size(); ++i) res.eigenvalues.push_back(std::max(0.0, values(i)));
  std::size_t k = cfg.components;
  if (k == 0) {
    double total = 0.0;
    for (double v : res.eigenvalues) total += v;
    double acc = 0.0;
    while (k < d && total > 0.0 && acc < cfg.variance_fraction * total * (1.0 - 1e-12)) acc += res.eigenvalues[k++];
  }
  res.components = k;

  const Eigen::MatrixXd basis = vectors.leftCols(static_cast<Eigen::Index>(k));
  const Eigen::MatrixXd recon = (centered * basis * basis.transpose()).rowwise() + mean;
  res.reconstruction = Matrix(T, d);
  res.fused.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double v = recon(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c));
      res.reconstruction(t, c) = v;
      sum += v;
    }
    res.fused[t] = sum / static_cast<double>(d);
  }
  return res;
}

}  // namespace veli::baselines

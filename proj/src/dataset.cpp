#include "gradbench/dataset.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gradbench {

Dataset generate(std::uint64_t seed, std::size_t n, std::size_t p, double noise_scale) {
  if (n == 0 || p == 0) {
    throw std::invalid_argument("generate: need n >= 1 and p >= 1 (got n=" + std::to_string(n) +
                                ", p=" + std::to_string(p) + ")");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("generate: noise_scale must be finite and >= 0");
  }
  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);

  MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = rng.uniform(0.0, 100.0);

  Dataset d;
  d.seed = seed;
  d.noise_scale = noise_scale;
  d.x_max = x.maxCoeff();
  d.x_norm = x / d.x_max;

  d.true_theta.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) d.true_theta(j) = rng.normal();
  d.true_bias = rng.normal();

  VectorXd eps(rows);
  for (Eigen::Index i = 0; i < rows; ++i) eps(i) = rng.normal();

  d.y = (d.x_norm * d.true_theta).array() + d.true_bias;
  d.y += noise_scale * eps;
  return d;
}

Split split(const Dataset& d, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1), got " +
                                std::to_string(train_fraction));
  }
  const std::size_t n = d.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }

  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split: fraction " + std::to_string(train_fraction) +
                                " leaves an empty partition for n=" + std::to_string(n));
  }
  Split s;
  s.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

MatrixXd gather_rows(const MatrixXd& x, const std::vector<std::size_t>& indices) {
  MatrixXd out(static_cast<Eigen::Index>(indices.size()), x.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(indices[r]);
    if (i >= x.rows()) throw DimensionError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(r)) = x.row(i);
  }
  return out;
}

VectorXd gather(const VectorXd& v, const std::vector<std::size_t>& indices) {
  VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(indices[r]);
    if (i >= v.size()) throw DimensionError("gather: index out of range");
    out(static_cast<Eigen::Index>(r)) = v(i);
  }
  return out;
}

}  // namespace gradbench

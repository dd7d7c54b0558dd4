#pragma once

#include "gradbench/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gradbench {

/// Synthetic least-squares problem y = x_norm·θ + b + noise_scale·ε.
struct Dataset {
  std::uint64_t seed = 0;
  MatrixXd x_norm;     // n×p, entries in [0, 1]
  VectorXd y;          // n
  VectorXd true_theta; // p
  double true_bias = 0.0;
  double noise_scale = 0.0;
  double x_max = 0.0;  // global max of the raw U(0,100) draws; x_raw = x_norm * x_max

  std::size_t rows() const { return static_cast<std::size_t>(x_norm.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(x_norm.cols()); }
};

struct Split {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

inline constexpr std::size_t kDefaultRows = 1000;
inline constexpr std::size_t kDefaultFeatures = 5;
inline constexpr double kDefaultNoiseScale = 0.1;
inline constexpr double kDefaultTrainFraction = 0.9;
inline constexpr std::uint64_t kDefaultSeed = 100;

/// Draw order from a single Rng(seed): the n·p raw entries of X row by row
/// from U(0,100), then θ (p normals), then b, then ε (n normals).
/// X is divided by its single global maximum.
Dataset generate(std::uint64_t seed, std::size_t n = kDefaultRows,
                 std::size_t p = kDefaultFeatures, double noise_scale = kDefaultNoiseScale);

/// Fisher–Yates shuffle of 0..n-1 with Rng(seed); the first
/// floor(n·train_fraction) entries are the training set.
Split split(const Dataset& d, std::uint64_t seed, double train_fraction = kDefaultTrainFraction);

/// Rows of `d` selected by `indices`, in that order.
MatrixXd gather_rows(const MatrixXd& x, const std::vector<std::size_t>& indices);
VectorXd gather(const VectorXd& v, const std::vector<std::size_t>& indices);

}  // namespace gradbench

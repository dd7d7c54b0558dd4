#include "gradbench/dataset.hpp"
#include "gradbench/model.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace gradbench;

TEST_CASE("generate defaults") {
  const Dataset d = generate(kDefaultSeed);
  CHECK(d.rows() == 1000);
  CHECK(d.features() == 5);
  CHECK(d.noise_scale == 0.1);
  CHECK(d.true_theta.size() == 5);
  CHECK(d.x_norm.minCoeff() >= 0.0);
  CHECK(d.x_norm.maxCoeff() == 1.0);

  // Raw entries are U(0,100): 5000 draws, mean within 50 ± 1.
  const double raw_mean = (d.x_norm * d.x_max).mean();
  CHECK(std::abs(raw_mean - 50.0) < 1.0);
  CHECK(d.x_max < 100.0);
}

TEST_CASE("generate noise-free targets are exactly linear") {
  const Dataset d = generate(7, 200, 3, 0.0);
  VectorXd expected = d.x_norm * d.true_theta;
  expected.array() += d.true_bias;
  CHECK(d.y == expected);
}

TEST_CASE("generate assembles y from the documented draw order") {
  const Dataset d = generate(123, 4, 2, 0.5);
  Rng rng(123);
  MatrixXd raw(4, 2);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) raw(i, j) = rng.uniform(0.0, 100.0);
  VectorXd theta(2);
  theta(0) = rng.normal();
  theta(1) = rng.normal();
  const double bias = rng.normal();
  CHECK(d.x_norm == raw / raw.maxCoeff());
  CHECK(d.true_theta == theta);
  CHECK(d.true_bias == bias);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double eps = rng.normal();
    const double y = d.x_norm.row(i).dot(theta) + bias + 0.5 * eps;
    CHECK(d.y(i) == doctest::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("generate is deterministic and validates input") {
  const Dataset a = generate(100), b = generate(100), c = generate(101);
  CHECK(a.x_norm == b.x_norm);
  CHECK(a.y == b.y);
  CHECK(a.true_theta == b.true_theta);
  CHECK(a.true_bias == b.true_bias);
  CHECK(a.y != c.y);

  CHECK_THROWS_AS(generate(1, 0, 5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(generate(1, 10, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(generate(1, 10, 5, -0.1), std::invalid_argument);
}

TEST_CASE("split sizes and disjointness") {
  const Dataset d = generate(100);
  const Split s = split(d, 100, 0.9);
  CHECK(s.train_indices.size() == 900);
  CHECK(s.val_indices.size() == 100);

  std::vector<std::size_t> all = s.train_indices;
  all.insert(all.end(), s.val_indices.begin(), s.val_indices.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(1000);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  CHECK(all == expected);

  const Dataset small = generate(1, 10, 2, 0.1);
  const Split half = split(small, 3, 0.5);
  CHECK(half.train_indices.size() == 5);
  CHECK(half.val_indices.size() == 5);
  for (auto i : half.train_indices)
    CHECK(std::find(half.val_indices.begin(), half.val_indices.end(), i) == half.val_indices.end());
}

TEST_CASE("split is deterministic per seed and independent of the data seed") {
  const Dataset d = generate(100);
  const Split a = split(d, 5), b = split(d, 5), c = split(d, 6);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.val_indices == b.val_indices);
  CHECK(a.train_indices != c.train_indices);

  const Split other_data = split(generate(200), 5);
  CHECK(other_data.train_indices == a.train_indices);
}

TEST_CASE("split rejects bad fractions") {
  const Dataset d = generate(1, 10, 2, 0.1);
  for (double f : {0.0, 1.0, -0.5, 1.5}) CHECK_THROWS_AS(split(d, 1, f), std::invalid_argument);
  CHECK_THROWS_AS(split(d, 1, 0.05), std::invalid_argument);  // floor(0.5) = 0 training rows
}

TEST_CASE("gather") {
  const Dataset d = generate(1, 6, 2, 0.1);
  const MatrixXd rows = gather_rows(d.x_norm, {4, 0});
  CHECK(rows.row(0) == d.x_norm.row(4));
  CHECK(rows.row(1) == d.x_norm.row(0));
  CHECK(gather(d.y, {5})(0) == d.y(5));
  CHECK_THROWS_AS(gather_rows(d.x_norm, {6}), DimensionError);
}

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gradbench {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that gathering a batch of examples copies contiguous rows.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pivot threshold for solve_spd, relative to the largest diagonal entry.
inline constexpr double kSpdPivotTolerance = 1e-12;

template <typename Derived, typename OtherDerived>
Vector<typename Derived::Scalar> matvec(const Eigen::MatrixBase<Derived>& a,
                                        const Eigen::MatrixBase<OtherDerived>& v) {
  if (a.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) +
                         " columns but vector has " + std::to_string(v.size()) +
                         " elements");
  }
  return a * v;
}

/// XᵀX. The upper triangle is mirrored from the lower one so the result is
/// exactly symmetric.
template <typename Derived>
Matrix<typename Derived::Scalar> gram(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() < 1) throw DimensionError("gram: matrix has no rows");
  const Eigen::Index p = a.cols();
  Matrix<Scalar> g(p, p);
  g.template triangularView<Eigen::Lower>() = a.transpose() * a;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) g(i, j) = g(j, i);
  return g;
}

/// Solves a·x = rhs for symmetric positive definite `a` by Cholesky
/// factorization (a = L·Lᵀ) and two triangular solves. Only the lower
/// triangle of `a` is read.
///
/// Throws SingularMatrixError when a pivot falls to or below
/// kSpdPivotTolerance times the largest diagonal magnitude.
template <typename Derived, typename OtherDerived>
Vector<typename Derived::Scalar> solve_spd(const Eigen::MatrixBase<Derived>& a,
                                           const Eigen::MatrixBase<OtherDerived>& rhs) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = a.rows();
  if (a.cols() != p) throw DimensionError("solve_spd: matrix is not square");
  if (rhs.size() != p) throw DimensionError("solve_spd: right-hand side has wrong length");

  Scalar scale = Scalar(0);
  for (Eigen::Index i = 0; i < p; ++i) scale = std::max(scale, Scalar(std::abs(a(i, i))));
  const Scalar threshold = Scalar(kSpdPivotTolerance) * std::max(scale, Scalar(1e-300));

  Matrix<Scalar> lower = Matrix<Scalar>::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Scalar pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (!(pivot > threshold)) {
      throw SingularMatrixError("solve_spd: non-positive pivot " + std::to_string(pivot) +
                                " at column " + std::to_string(j) +
                                "; matrix is not positive definite");
    }
    const Scalar diag = std::sqrt(pivot);
    lower(j, j) = diag;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      Scalar s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / diag;
    }
  }

  // L·z = rhs, then Lᵀ·x = z.
  Vector<Scalar> x = rhs;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) x(i) -= lower(i, k) * x(k);
    x(i) /= lower(i, i);
  }
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    for (Eigen::Index k = i + 1; k < p; ++k) x(i) -= lower(k, i) * x(k);
    x(i) /= lower(i, i);
  }
  return x;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.array().isFinite().all();
}

/// Deterministic pseudo-random stream.
///
/// Core generator is xoshiro256** 1.0 (Blackman & Vigna):
///
///   result = rotl(s1 * 5, 7) * 9
///   t = s1 << 17
///   s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
///   s2 ^= t;  s3 = rotl(s3, 45)
///
/// The 256-bit state is filled by four successive outputs of SplitMix64
/// started at `seed`:
///
///   z = (x += 0x9e3779b97f4a7c15)
///   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
///   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
///   return z ^ (z >> 31)
///
/// Derived draws:
///   uniform01()       (next_u64() >> 11) * 2^-53, in [0, 1)
///   uniform(lo, hi)   lo + (hi - lo) * uniform01(), redrawn if rounding lands on hi
///   normal()          Box-Muller, cosine branch only: u1 = uniform01(), then
///                     u2 = uniform01(); sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
///                     Exactly two uniform draws per variate, no caching.
///   below(n)          rejection sampling on next_u64() % n, rejecting the
///                     low (2^64 mod n) values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  const std::array<std::uint64_t, 4>& state() const { return state_; }

  std::uint64_t next_u64();
  double uniform01();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace gradbench

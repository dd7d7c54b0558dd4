#pragma once

#include "gradbench/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

namespace gradbench {

template <typename Scalar>
struct LinearModel {
  Vector<Scalar> theta;
  Scalar bias = Scalar(0);

  Eigen::Index size() const { return theta.size(); }
  bool finite() const { return all_finite(theta) && std::isfinite(bias); }
  bool operator==(const LinearModel&) const = default;
};

template <typename Scalar>
struct Gradient {
  Vector<Scalar> d_theta;
  Scalar d_bias = Scalar(0);

  bool finite() const { return all_finite(d_theta) && std::isfinite(d_bias); }
};

enum class LossKind { MSE, MAE };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

template <typename Scalar, typename Derived>
Vector<Scalar> predict(const LinearModel<Scalar>& m, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != m.theta.size()) {
    throw DimensionError("predict: input has " + std::to_string(x.cols()) +
                         " features, model has " + std::to_string(m.theta.size()));
  }
  Vector<Scalar> out = x * m.theta;
  out.array() += m.bias;
  return out;
}

template <typename DerivedP, typename DerivedT>
typename DerivedP::Scalar loss(LossKind kind, const Eigen::MatrixBase<DerivedP>& pred,
                               const Eigen::MatrixBase<DerivedT>& target) {
  if (pred.size() == 0) throw DimensionError("loss: empty prediction vector");
  if (pred.size() != target.size()) throw DimensionError("loss: prediction/target length mismatch");
  const auto residual = (pred - target).array();
  switch (kind) {
    case LossKind::MSE:
      return residual.square().mean();
    case LossKind::MAE:
      return residual.abs().mean();
  }
  throw std::logic_error("loss: unknown LossKind");
}

template <typename Scalar, typename DerivedX, typename DerivedT>
Scalar loss(LossKind kind, const LinearModel<Scalar>& m, const Eigen::MatrixBase<DerivedX>& x,
            const Eigen::MatrixBase<DerivedT>& target) {
  return loss(kind, predict(m, x), target);
}

/// Analytic (sub)gradient of the mean loss over the rows of x.
///   MSE: (2/B)·xᵀr and (2/B)·Σr, with r = pred − target
///   MAE: (1/B)·xᵀsign(r) and (1/B)·Σsign(r), sign(0) = 0
template <typename Scalar, typename DerivedX, typename DerivedT>
Gradient<Scalar> loss_gradient(LossKind kind, const LinearModel<Scalar>& m,
                               const Eigen::MatrixBase<DerivedX>& x,
                               const Eigen::MatrixBase<DerivedT>& target) {
  if (x.rows() == 0) throw DimensionError("loss_gradient: empty batch");
  if (x.rows() != target.size()) throw DimensionError("loss_gradient: batch/target length mismatch");
  const Vector<Scalar> residual = predict(m, x) - target;
  const auto batch = static_cast<Scalar>(x.rows());

  Vector<Scalar> dir;
  Scalar factor;
  switch (kind) {
    case LossKind::MSE:
      dir = residual;
      factor = Scalar(2) / batch;
      break;
    case LossKind::MAE:
      dir = residual.array().sign().matrix();
      factor = Scalar(1) / batch;
      break;
    default:
      throw std::logic_error("loss_gradient: unknown LossKind");
  }
  Gradient<Scalar> g;
  g.d_theta = factor * (x.transpose() * dir);
  g.d_bias = factor * dir.sum();
  return g;
}

/// Largest per-coordinate discrepancy between the analytic gradient and a
/// central difference (J(θ+h·e_k) − J(θ−h·e_k)) / 2h, over θ and the bias.
/// Error is |analytic − numeric| / max(1, |analytic|, |numeric|).
template <typename Scalar, typename DerivedX, typename DerivedT>
Scalar gradient_check(LossKind kind, const LinearModel<Scalar>& m,
                      const Eigen::MatrixBase<DerivedX>& x,
                      const Eigen::MatrixBase<DerivedT>& target, Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("gradient_check: h must be positive");
  const Gradient<Scalar> analytic = loss_gradient(kind, m, x, target);

  auto rel_error = [](Scalar a, Scalar n) {
    using std::abs;
    return abs(a - n) / std::max({Scalar(1), abs(a), abs(n)});
  };

  Scalar worst = Scalar(0);
  LinearModel<Scalar> probe = m;
  for (Eigen::Index k = 0; k < m.theta.size(); ++k) {
    const Scalar saved = probe.theta(k);
    probe.theta(k) = saved + h;
    const Scalar up = loss(kind, probe, x, target);
    probe.theta(k) = saved - h;
    const Scalar down = loss(kind, probe, x, target);
    probe.theta(k) = saved;
    worst = std::max(worst, rel_error(analytic.d_theta(k), (up - down) / (Scalar(2) * h)));
  }
  probe.bias = m.bias + h;
  const Scalar up = loss(kind, probe, x, target);
  probe.bias = m.bias - h;
  const Scalar down = loss(kind, probe, x, target);
  worst = std::max(worst, rel_error(analytic.d_bias, (up - down) / (Scalar(2) * h)));
  return worst;
}

/// Least-squares fit by the normal equations. x is augmented with a ones
/// column for the bias and (AᵀA)·w = Aᵀy is solved with solve_spd.
/// Throws SingularMatrixError on a rank-deficient design.
template <typename DerivedX, typename DerivedY>
LinearModel<typename DerivedX::Scalar> closed_form(const Eigen::MatrixBase<DerivedX>& x,
                                                   const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  if (x.rows() != y.size()) throw DimensionError("closed_form: row/target length mismatch");
  const Eigen::Index p = x.cols();
  Matrix<Scalar> augmented(x.rows(), p + 1);
  augmented.leftCols(p) = x;
  augmented.col(p).setOnes();

  const Vector<Scalar> w = solve_spd(gram(augmented), augmented.transpose() * y);
  LinearModel<Scalar> m;
  m.theta = w.head(p);
  m.bias = w(p);
  return m;
}

}  // namespace gradbench

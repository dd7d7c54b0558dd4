#pragma once

#include "gradbench/model.hpp"
#include "gradbench/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gradbench {

enum class OptimizerKind { SGD, Momentum, NAG, Adagrad, RMSProp, Adadelta, Adam };

/// Momentum/NAG formulation.
///   Classic:   v = γv + ηg,  θ -= v            (NAG: g taken at θ − γv_prev)
///   Decoupled: v = μv + g,   θ -= η·v          (NAG: θ -= η·(g + μv))
enum class Variant { Classic, Decoupled };

std::string_view to_string(OptimizerKind kind);
std::string_view to_string(Variant variant);
OptimizerKind parse_optimizer_kind(std::string_view name);
Variant parse_variant(std::string_view name);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::SGD;
  Variant variant = Variant::Decoupled;
  Scalar lr = Scalar(0.01);
  Scalar momentum = Scalar(0.9);  // γ (Classic) / μ (Decoupled)
  Scalar decay = Scalar(0.9);     // running-average factor for RMSProp and Adadelta
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  /// Per-kind defaults: RMSProp η=0.001; Adadelta η=1, ε=1e-6; Adam η=0.001.
  static OptimizerSpec defaults(OptimizerKind kind) {
    OptimizerSpec s;
    s.kind = kind;
    switch (kind) {
      case OptimizerKind::RMSProp:
        s.lr = Scalar(0.001);
        break;
      case OptimizerKind::Adadelta:
        s.lr = Scalar(1);
        s.eps = Scalar(1e-6);
        break;
      case OptimizerKind::Adam:
        s.lr = Scalar(0.001);
        break;
      default:
        break;
    }
    return s;
  }

  bool has_momentum() const {
    return kind == OptimizerKind::Momentum || kind == OptimizerKind::NAG;
  }

  void validate() const {
    auto in_unit = [](Scalar v) { return v >= Scalar(0) && v < Scalar(1); };
    if (!(lr >= Scalar(0)) || !std::isfinite(lr)) throw std::invalid_argument("optimizer: lr must be >= 0");
    if (!in_unit(momentum)) throw std::invalid_argument("optimizer: momentum must lie in [0, 1)");
    if (!in_unit(decay)) throw std::invalid_argument("optimizer: decay must lie in [0, 1)");
    if (!in_unit(beta1) || !in_unit(beta2)) throw std::invalid_argument("optimizer: betas must lie in [0, 1)");
    if (!(eps >= Scalar(0))) throw std::invalid_argument("optimizer: eps must be >= 0");
  }
};

/// Accumulators for one parameter tensor. Empty until the first step.
template <typename Scalar>
struct TensorState {
  Vector<Scalar> velocity;
  Vector<Scalar> sq_grad;    // Adagrad: Σg²;  RMSProp/Adadelta: E[g²]
  Vector<Scalar> sq_update;  // Adadelta: E[Δθ²]
  Vector<Scalar> moment1;    // Adam m
  Vector<Scalar> moment2;    // Adam v

  bool operator==(const TensorState&) const = default;
};

template <typename Scalar>
struct OptimizerState {
  TensorState<Scalar> theta;
  TensorState<Scalar> bias;  // length-1 accumulators
  std::int64_t step = 0;

  bool operator==(const OptimizerState&) const = default;
};

template <typename Scalar>
struct StepResult {
  LinearModel<Scalar> model;
  OptimizerState<Scalar> state;
};

template <typename Scalar>
using GradientFn = std::function<Gradient<Scalar>(const LinearModel<Scalar>&)>;

namespace detail {

template <typename Scalar>
void ensure_slot(Vector<Scalar>& slot, Eigen::Index n) {
  if (slot.size() == 0) {
    slot = Vector<Scalar>::Zero(n);
  } else if (slot.size() != n) {
    throw DimensionError("optimizer state does not match parameter size");
  }
}

template <typename Scalar>
Vector<Scalar> scalar_vec(Scalar v) {
  Vector<Scalar> out(1);
  out(0) = v;
  return out;
}

inline void require_finite(bool finite) {
  if (!finite) throw DivergenceError("optimizer: non-finite gradient");
}

// Element-wise rules on a single tensor. `param` is updated in place.

template <typename Scalar>
void sgd(const OptimizerSpec<Scalar>& s, Vector<Scalar>& param, const Vector<Scalar>& g) {
  param -= s.lr * g;
}

template <typename Scalar>
void momentum_classic(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st,
                      Vector<Scalar>& param, const Vector<Scalar>& g) {
  ensure_slot(st.velocity, param.size());
  st.velocity = s.momentum * st.velocity + s.lr * g;
  param -= st.velocity;
}

template <typename Scalar>
void momentum_decoupled(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st,
                        Vector<Scalar>& param, const Vector<Scalar>& g) {
  ensure_slot(st.velocity, param.size());
  st.velocity = s.momentum * st.velocity + g;
  param -= s.lr * st.velocity;
}

template <typename Scalar>
void nag_decoupled(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st,
                   Vector<Scalar>& param, const Vector<Scalar>& g) {
  ensure_slot(st.velocity, param.size());
  st.velocity = s.momentum * st.velocity + g;
  param -= s.lr * (g + s.momentum * st.velocity);
}

template <typename Scalar>
void adagrad(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st, Vector<Scalar>& param,
             const Vector<Scalar>& g) {
  ensure_slot(st.sq_grad, param.size());
  st.sq_grad.array() += g.array().square();
  param.array() -= s.lr * g.array() / (st.sq_grad.array() + s.eps).sqrt();
}

template <typename Scalar>
void rmsprop(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st, Vector<Scalar>& param,
             const Vector<Scalar>& g) {
  ensure_slot(st.sq_grad, param.size());
  st.sq_grad = s.decay * st.sq_grad + (Scalar(1) - s.decay) * g.cwiseAbs2();
  param.array() -= s.lr * g.array() / (st.sq_grad.array() + s.eps).sqrt();
}

template <typename Scalar>
void adadelta(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st, Vector<Scalar>& param,
              const Vector<Scalar>& g) {
  ensure_slot(st.sq_grad, param.size());
  ensure_slot(st.sq_update, param.size());
  st.sq_grad = s.decay * st.sq_grad + (Scalar(1) - s.decay) * g.cwiseAbs2();
  const Vector<Scalar> delta =
      (-((st.sq_update.array() + s.eps).sqrt() / (st.sq_grad.array() + s.eps).sqrt()) * g.array())
          .matrix();
  st.sq_update = s.decay * st.sq_update + (Scalar(1) - s.decay) * delta.cwiseAbs2();
  param += s.lr * delta;
}

template <typename Scalar>
void adam(const OptimizerSpec<Scalar>& s, TensorState<Scalar>& st, Vector<Scalar>& param,
          const Vector<Scalar>& g, std::int64_t t) {
  ensure_slot(st.moment1, param.size());
  ensure_slot(st.moment2, param.size());
  st.moment1 = s.beta1 * st.moment1 + (Scalar(1) - s.beta1) * g;
  st.moment2 = s.beta2 * st.moment2 + (Scalar(1) - s.beta2) * g.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(s.beta1, static_cast<Scalar>(t));
  const Scalar c2 = Scalar(1) - std::pow(s.beta2, static_cast<Scalar>(t));
  const auto m_hat = st.moment1.array() / c1;
  const auto v_hat = st.moment2.array() / c2;
  param.array() -= s.lr * m_hat / (v_hat.sqrt() + s.eps);
}

// Applies `rule(tensor_state, param, grad)` to θ and to the bias.
template <typename Scalar, typename Rule>
StepResult<Scalar> apply(const OptimizerState<Scalar>& state, const LinearModel<Scalar>& m,
                         const Gradient<Scalar>& g, Rule&& rule) {
  if (g.d_theta.size() != m.theta.size()) {
    throw DimensionError("optimizer: gradient has " + std::to_string(g.d_theta.size()) +
                         " entries, model has " + std::to_string(m.theta.size()));
  }
  require_finite(g.finite());
  StepResult<Scalar> out{m, state};
  ++out.state.step;
  rule(out.state.theta, out.model.theta, g.d_theta);
  Vector<Scalar> bias = scalar_vec(m.bias);
  rule(out.state.bias, bias, scalar_vec(g.d_bias));
  out.model.bias = bias(0);
  return out;
}

}  // namespace detail

template <typename Scalar>
StepResult<Scalar> step_sgd(const OptimizerSpec<Scalar>& spec, const OptimizerState<Scalar>& state,
                            const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](TensorState<Scalar>&, Vector<Scalar>& p, const Vector<Scalar>& gr) {
    detail::sgd(spec, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_momentum_classic(const OptimizerSpec<Scalar>& spec,
                                         const OptimizerState<Scalar>& state,
                                         const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::momentum_classic(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_momentum_decoupled(const OptimizerSpec<Scalar>& spec,
                                           const OptimizerState<Scalar>& state,
                                           const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::momentum_decoupled(spec, st, p, gr);
  });
}

/// θ − γ·v_prev, the point at which classic NAG evaluates its gradient.
template <typename Scalar>
LinearModel<Scalar> nag_lookahead(const OptimizerSpec<Scalar>& spec,
                                  const OptimizerState<Scalar>& state,
                                  const LinearModel<Scalar>& m) {
  LinearModel<Scalar> ahead = m;
  if (state.theta.velocity.size() != 0) {
    if (state.theta.velocity.size() != m.theta.size()) {
      throw DimensionError("optimizer state does not match parameter size");
    }
    ahead.theta -= spec.momentum * state.theta.velocity;
  }
  if (state.bias.velocity.size() != 0) ahead.bias -= spec.momentum * state.bias.velocity(0);
  return ahead;
}

/// Classic NAG. `g_lookahead` must already be the gradient at
/// nag_lookahead(spec, state, m).
template <typename Scalar>
StepResult<Scalar> step_nag_classic(const OptimizerSpec<Scalar>& spec,
                                    const OptimizerState<Scalar>& state,
                                    const LinearModel<Scalar>& m,
                                    const Gradient<Scalar>& g_lookahead) {
  return detail::apply(state, m, g_lookahead, [&](auto& st, auto& p, const auto& gr) {
    detail::momentum_classic(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_nag_classic(const OptimizerSpec<Scalar>& spec,
                                    const OptimizerState<Scalar>& state,
                                    const LinearModel<Scalar>& m,
                                    const GradientFn<Scalar>& gradient_at) {
  return step_nag_classic(spec, state, m, gradient_at(nag_lookahead(spec, state, m)));
}

template <typename Scalar>
StepResult<Scalar> step_nag_decoupled(const OptimizerSpec<Scalar>& spec,
                                      const OptimizerState<Scalar>& state,
                                      const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::nag_decoupled(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_adagrad(const OptimizerSpec<Scalar>& spec,
                                const OptimizerState<Scalar>& state, const LinearModel<Scalar>& m,
                                const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::adagrad(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_rmsprop(const OptimizerSpec<Scalar>& spec,
                                const OptimizerState<Scalar>& state, const LinearModel<Scalar>& m,
                                const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::rmsprop(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_adadelta(const OptimizerSpec<Scalar>& spec,
                                 const OptimizerState<Scalar>& state, const LinearModel<Scalar>& m,
                                 const Gradient<Scalar>& g) {
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::adadelta(spec, st, p, gr);
  });
}

template <typename Scalar>
StepResult<Scalar> step_adam(const OptimizerSpec<Scalar>& spec, const OptimizerState<Scalar>& state,
                             const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  const std::int64_t t = state.step + 1;
  return detail::apply(state, m, g, [&](auto& st, auto& p, const auto& gr) {
    detail::adam(spec, st, p, gr, t);
  });
}

/// One update with a precomputed gradient. For classic NAG the gradient is
/// taken to be the look-ahead gradient.
template <typename Scalar>
StepResult<Scalar> step(const OptimizerSpec<Scalar>& spec, const OptimizerState<Scalar>& state,
                        const LinearModel<Scalar>& m, const Gradient<Scalar>& g) {
  switch (spec.kind) {
    case OptimizerKind::SGD:
      return step_sgd(spec, state, m, g);
    case OptimizerKind::Momentum:
      return spec.variant == Variant::Classic ? step_momentum_classic(spec, state, m, g)
                                              : step_momentum_decoupled(spec, state, m, g);
    case OptimizerKind::NAG:
      return spec.variant == Variant::Classic ? step_nag_classic(spec, state, m, g)
                                              : step_nag_decoupled(spec, state, m, g);
    case OptimizerKind::Adagrad:
      return step_adagrad(spec, state, m, g);
    case OptimizerKind::RMSProp:
      return step_rmsprop(spec, state, m, g);
    case OptimizerKind::Adadelta:
      return step_adadelta(spec, state, m, g);
    case OptimizerKind::Adam:
      return step_adam(spec, state, m, g);
  }
  throw std::logic_error("step: unknown OptimizerKind");
}

/// One update, querying the gradient where the rule needs it: at the
/// look-ahead point for classic NAG, at `m` for everything else. The
/// gradient function is called exactly once.
template <typename Scalar>
StepResult<Scalar> step(const OptimizerSpec<Scalar>& spec, const OptimizerState<Scalar>& state,
                        const LinearModel<Scalar>& m, const GradientFn<Scalar>& gradient_at) {
  if (spec.kind == OptimizerKind::NAG && spec.variant == Variant::Classic) {
    return step_nag_classic(spec, state, m, gradient_at);
  }
  return step(spec, state, m, gradient_at(m));
}

}  // namespace gradbench

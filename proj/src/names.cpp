#include "gradbench/model.hpp"
#include "gradbench/optimizers.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace gradbench {
namespace {

constexpr std::array<std::pair<OptimizerKind, std::string_view>, 7> kOptimizerNames{{
    {OptimizerKind::SGD, "sgd"},
    {OptimizerKind::Momentum, "momentum"},
    {OptimizerKind::NAG, "nag"},
    {OptimizerKind::Adagrad, "adagrad"},
    {OptimizerKind::RMSProp, "rmsprop"},
    {OptimizerKind::Adadelta, "adadelta"},
    {OptimizerKind::Adam, "adam"},
}};

}  // namespace

std::string_view to_string(LossKind kind) {
  return kind == LossKind::MSE ? "mse" : "mae";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mse") return LossKind::MSE;
  if (name == "mae") return LossKind::MAE;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) {
  for (const auto& [k, name] : kOptimizerNames)
    if (k == kind) return name;
  throw std::logic_error("unknown OptimizerKind");
}

std::string_view to_string(Variant variant) {
  return variant == Variant::Classic ? "classic" : "decoupled";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (const auto& [k, n] : kOptimizerNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

Variant parse_variant(std::string_view name) {
  if (name == "classic") return Variant::Classic;
  if (name == "decoupled") return Variant::Decoupled;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

}  // namespace gradbench

#pragma once

#include "gradbench/dataset.hpp"
#include "gradbench/model.hpp"
#include "gradbench/optimizers.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace gradbench {

/// Batch size B. B=1 is stochastic, B=n_train is full batch, anything in
/// between is mini-batch. An unset size means "the whole training set".
class BatchStrategy {
 public:
  enum class Regime { Stochastic, MiniBatch, FullBatch };

  static BatchStrategy full() { return BatchStrategy{}; }
  static BatchStrategy of(std::size_t batch_size);

  bool is_full() const { return !size_.has_value(); }
  std::optional<std::size_t> size() const { return size_; }
  std::size_t resolve(std::size_t n_train) const;
  Regime regime(std::size_t n_train) const;

  bool operator==(const BatchStrategy&) const = default;

 private:
  std::optional<std::size_t> size_;
};

inline constexpr double kDefaultDivergenceThreshold = 1e10;
inline constexpr std::size_t kDefaultEpochs = 1000;

struct RunConfig {
  OptimizerSpec<double> optimizer;
  LossKind loss = LossKind::MSE;
  BatchStrategy batch = BatchStrategy::full();
  std::size_t epochs = kDefaultEpochs;
  std::uint64_t data_seed = kDefaultSeed;
  std::uint64_t split_seed = kDefaultSeed;
  std::uint64_t init_seed = kDefaultSeed;
  std::uint64_t batch_seed = kDefaultSeed;
  double divergence_threshold = kDefaultDivergenceThreshold;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based, recorded after that epoch's update
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool diverged = false;

  bool operator==(const EpochRecord&) const = default;
};

struct RunResult {
  std::vector<EpochRecord> records;
  LinearModel<double> final_model;
  std::size_t gradient_rows = 0;  // example rows fed to gradient evaluations

  bool diverged() const { return !records.empty() && records.back().diverged; }
};

/// θ and b i.i.d. from the open interval (−1/√p, 1/√p); θ drawn first.
LinearModel<double> init_model(std::size_t p, std::uint64_t seed);

/// B distinct training indices by a partial Fisher–Yates shuffle of a copy of
/// `train_indices`. Full batch returns `train_indices` unchanged and draws
/// nothing from `rng`.
std::vector<std::size_t> sample_batch(const BatchStrategy& strategy,
                                      const std::vector<std::size_t>& train_indices, Rng& rng);

/// One optimizer step per epoch on one sampled batch, then full train loss
/// (configured LossKind) and validation MSE with the updated model. Stops at
/// the first epoch where a loss or parameter is non-finite or exceeds the
/// divergence threshold; that record carries diverged = true.
RunResult run(const RunConfig& config, const Dataset& d, const Split& s);

}  // namespace gradbench

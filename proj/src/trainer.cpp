#include "gradbench/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gradbench {

BatchStrategy BatchStrategy::of(std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("BatchStrategy: batch size must be >= 1");
  BatchStrategy s;
  s.size_ = batch_size;
  return s;
}

std::size_t BatchStrategy::resolve(std::size_t n_train) const {
  if (!size_) return n_train;
  if (*size_ > n_train) {
    throw std::invalid_argument("batch size " + std::to_string(*size_) +
                                " exceeds training set size " + std::to_string(n_train));
  }
  return *size_;
}

BatchStrategy::Regime BatchStrategy::regime(std::size_t n_train) const {
  const std::size_t b = resolve(n_train);
  if (b == n_train) return Regime::FullBatch;
  if (b == 1) return Regime::Stochastic;
  return Regime::MiniBatch;
}

LinearModel<double> init_model(std::size_t p, std::uint64_t seed) {
  if (p == 0) throw std::invalid_argument("init_model: p must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(p));
  Rng rng(seed);
  auto draw = [&] {
    for (;;) {
      const double v = rng.uniform(-bound, bound);
      if (v > -bound) return v;
    }
  };
  LinearModel<double> m;
  m.theta.resize(static_cast<Eigen::Index>(p));
  for (Eigen::Index k = 0; k < m.theta.size(); ++k) m.theta(k) = draw();
  m.bias = draw();
  return m;
}

std::vector<std::size_t> sample_batch(const BatchStrategy& strategy,
                                      const std::vector<std::size_t>& train_indices, Rng& rng) {
  const std::size_t n = train_indices.size();
  const std::size_t b = strategy.resolve(n);
  if (b == n) return train_indices;

  std::vector<std::size_t> pool = train_indices;
  for (std::size_t i = 0; i < b; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(b);
  return pool;
}

namespace {

bool out_of_bounds(double v, double threshold) {
  return !std::isfinite(v) || std::abs(v) > threshold;
}

bool model_out_of_bounds(const LinearModel<double>& m, double threshold) {
  if (out_of_bounds(m.bias, threshold)) return true;
  for (Eigen::Index k = 0; k < m.theta.size(); ++k)
    if (out_of_bounds(m.theta(k), threshold)) return true;
  return false;
}

}  // namespace

RunResult run(const RunConfig& config, const Dataset& d, const Split& s) {
  if (config.epochs == 0) throw std::invalid_argument("run: epochs must be >= 1");
  if (!(config.divergence_threshold > 0.0)) {
    throw std::invalid_argument("run: divergence threshold must be positive");
  }
  config.optimizer.validate();

  const MatrixXd x_train = gather_rows(d.x_norm, s.train_indices);
  const VectorXd y_train = gather(d.y, s.train_indices);
  const MatrixXd x_val = gather_rows(d.x_norm, s.val_indices);
  const VectorXd y_val = gather(d.y, s.val_indices);
  // Validates the batch size against the training set before any work.
  config.batch.resolve(s.train_indices.size());

  RunResult result;
  result.records.reserve(config.epochs);
  LinearModel<double> model = init_model(d.features(), config.init_seed);
  OptimizerState<double> state;
  Rng batch_rng(config.batch_seed);
  const double threshold = config.divergence_threshold;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> batch = sample_batch(config.batch, s.train_indices, batch_rng);
    const MatrixXd x_batch = gather_rows(d.x_norm, batch);
    const VectorXd y_batch = gather(d.y, batch);

    const GradientFn<double> gradient_at = [&](const LinearModel<double>& at) {
      result.gradient_rows += static_cast<std::size_t>(x_batch.rows());
      return loss_gradient(config.loss, at, x_batch, y_batch);
    };

    EpochRecord rec;
    rec.epoch = epoch;
    try {
      auto next = step(config.optimizer, state, model, gradient_at);
      model = std::move(next.model);
      state = std::move(next.state);
    } catch (const DivergenceError&) {
      rec.diverged = true;
    }
    rec.train_loss = loss(config.loss, model, x_train, y_train);
    rec.val_loss = loss(LossKind::MSE, model, x_val, y_val);
    rec.diverged = rec.diverged || out_of_bounds(rec.train_loss, threshold) ||
                   out_of_bounds(rec.val_loss, threshold) || model_out_of_bounds(model, threshold);
    result.records.push_back(rec);
    if (rec.diverged) break;
  }
  result.final_model = model;
  return result;
}

}  // namespace gradbench

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/common.hpp"
#include "marq/nn/model.hpp"

namespace marq::nn {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 0.001;
  int patience = 10;
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation_fraction must be in (0,1)");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"patience", c.patience},
                     {"validation_fraction", c.validation_fraction},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.patience = j.value("patience", d.patience);
  c.validation_fraction = j.value("validation_fraction", d.validation_fraction);
  c.seed = j.value("seed", d.seed);
}

using Batch = std::span<const Sample>;

/// Composite loss used by the trainer. Implementations own whatever state the
/// strategy carries between tasks (snapshots, anchors, buffers).
///
/// prepare_batch runs before loss/gradient on each minibatch and is the only
/// hook that may mutate the model or draw randomness; loss and gradient must
/// be pure functions of (model, batch, prepared state) so that analytic
/// gradients can be checked against finite differences.
class LossStrategy {
 public:
  virtual ~LossStrategy() = default;
  virtual std::string name() const = 0;
  virtual void begin_task(int /*task_index*/, const TrainConfig& /*cfg*/) {}
  virtual void prepare_batch(Model& /*model*/, Batch /*batch*/, bool /*first_pass*/, Rng& /*rng*/) {}
  virtual double loss(const Model& model, Batch batch) const = 0;
  virtual Gradients gradient(const Model& model, Batch batch) const = 0;
  virtual void end_task(const Model& /*model*/, const Dataset& /*train_data*/) {}
  virtual void observe_validation(double /*val_mse*/) {}
  virtual nlohmann::json state_json() const { return nlohmann::json::object(); }
  virtual void load_state(const nlohmann::json& /*j*/) {}
};

struct EpochStats {
  double train_loss = 0.0;  // mean composite batch loss
  double val_mse = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  double best_val_mse = 0.0;
  int best_epoch = -1;
};

/// Deterministic shuffled split of [0, n) into (head, tail) index sets.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double head_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_head = static_cast<std::size_t>(std::llround(head_fraction * static_cast<double>(n)));
  if (n >= 2) n_head = std::clamp<std::size_t>(n_head, 1, n - 1);
  return {std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_head)),
          std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(n_head), idx.end())};
}

/// Trains the model on one task with seeded mini-batch gradient descent and
/// early stopping on a held-out validation split; restores the best-validation
/// snapshot before returning. task_index is 1-based within the task stream.
inline TrainHistory train_task(Model& model, const Dataset& data, LossStrategy& strategy,
                               const TrainConfig& cfg, int task_index = 1) {
  if (data.empty()) throw DataError("train_task: empty dataset");
  cfg.validate();

  Rng rng(derive_seed(cfg.seed, "train-task", static_cast<std::uint64_t>(task_index)));
  auto [val_idx, train_idx] =
      split_indices(data.size(), cfg.validation_fraction,
                    derive_seed(cfg.seed, "val-split", static_cast<std::uint64_t>(task_index)));
  if (train_idx.empty()) train_idx = val_idx;  // single-sample dataset

  Dataset val;
  val.reserve(val_idx.size());
  for (std::size_t i : val_idx) val.push_back(data[i]);
  if (val.empty()) val = data;

  strategy.begin_task(task_index, cfg);

  TrainHistory hist;
  std::vector<double> best = flatten(model);
  double best_val = dataset_mse(model, val);
  hist.best_val_mse = best_val;
  int bad_epochs = 0;
  std::vector<Sample> batch_buf;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch_buf.clear();
      for (std::size_t i = start; i < end; ++i) batch_buf.push_back(data[train_idx[i]]);
      const Batch batch(batch_buf);
      strategy.prepare_batch(model, batch, epoch == 0, rng);
      loss_sum += strategy.loss(model, batch);
      ++batches;
      const Gradients g = strategy.gradient(model, batch);
      apply_update(model, g, cfg.learning_rate);
    }

    const double val_mse = dataset_mse(model, val);
    strategy.observe_validation(val_mse);
    hist.epochs.push_back({batches ? loss_sum / static_cast<double>(batches) : 0.0, val_mse});

    if (val_mse < best_val) {
      best_val = val_mse;
      best = flatten(model);
      hist.best_val_mse = val_mse;
      hist.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  unflatten(best, model);
  return hist;
}

}  // namespace marq::nn

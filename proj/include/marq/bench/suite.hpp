#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "marq/bench/metrics.hpp"
#include "marq/nn/model.hpp"
#include "marq/nn/train.hpp"

namespace marq::bench {

/// One task's data, already normalized into the model's input/output space.
struct TaskData {
  std::string task_id;
  nn::Dataset train;
  nn::Dataset test;
};

/// Called after each task finishes: (1-based task index, model, row of test
/// errors for tasks 1..index). Used by the CLI to write checkpoints.
using TaskHook = std::function<void(int, const nn::Model&, const std::vector<double>&)>;

struct SuiteResult {
  EvalMatrix matrix;
  std::vector<double> task_seconds;   // wall-clock training time per task
  std::vector<nn::TrainHistory> histories;
};

/// Trains one model incrementally through the task stream. After finishing
/// task K' the model is evaluated on the test set of every task k <= K'
/// (task identity is never an input), filling row K' of the matrix. Training
/// on task K' only sees task K''s training data; whatever memory a strategy
/// keeps lives in the strategy itself.
///
/// start_task/partial support resuming: pass the model, strategy state, and
/// matrix rows recorded through task start_task-1. Per-task RNG streams are
/// derived from (seed, task index), so a resumed run reproduces the rows a
/// full run would have produced.
inline SuiteResult run_scenario_suite(const std::vector<TaskData>& tasks,
                                      nn::LossStrategy& strategy, nn::Model& model,
                                      const nn::TrainConfig& cfg, const TaskHook& hook = {},
                                      int start_task = 1, EvalMatrix partial = {}) {
  if (tasks.empty()) throw DataError("run_scenario_suite: no tasks");
  if (start_task < 1 || static_cast<std::size_t>(start_task) > tasks.size() + 1)
    throw DataError("run_scenario_suite: start_task out of range");
  if (partial.rows.size() != static_cast<std::size_t>(start_task - 1))
    throw DataError("run_scenario_suite: partial matrix does not match start_task");

  SuiteResult result;
  result.matrix = std::move(partial);
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(start_task); ++i)
    result.task_seconds.push_back(0.0);

  for (std::size_t t = static_cast<std::size_t>(start_task) - 1; t < tasks.size(); ++t) {
    const TaskData& task = tasks[t];
    if (task.train.empty()) throw DataError("missing training data for task " + task.task_id);
    if (task.test.empty()) throw DataError("missing test data for task " + task.task_id);

    const auto t0 = std::chrono::steady_clock::now();
    result.histories.push_back(
        nn::train_task(model, task.train, strategy, cfg, static_cast<int>(t + 1)));
    strategy.end_task(model, task.train);
    const auto t1 = std::chrono::steady_clock::now();
    result.task_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

    std::vector<double> row;
    row.reserve(t + 1);
    for (std::size_t k = 0; k <= t; ++k) row.push_back(nn::dataset_mse(model, tasks[k].test));
    result.matrix.append_row(row);
    if (hook) hook(static_cast<int>(t + 1), model, result.matrix.rows.back());
  }
  return result;
}

struct IndirectResult {
  double after_first = 0.0;   // target-task test MSE after training on the first task only
  double after_prefix = 0.0;  // after training on the whole prefix
  double delta = 0.0;         // positive = indirect improvement
};

/// Trains through the prefix tasks and measures how much the (never trained)
/// target task's test error drops between "after the first task" and "after
/// the full prefix".
inline IndirectResult indirect_learning(const std::vector<TaskData>& prefix,
                                        const TaskData& target, nn::LossStrategy& strategy,
                                        nn::Model& model, const nn::TrainConfig& cfg) {
  if (prefix.empty()) throw DataError("indirect_learning: empty prefix");
  for (const TaskData& p : prefix)
    if (p.task_id == target.task_id)
      throw DataError("indirect_learning: target task appears in the prefix");

  IndirectResult out;
  for (std::size_t t = 0; t < prefix.size(); ++t) {
    nn::train_task(model, prefix[t].train, strategy, cfg, static_cast<int>(t + 1));
    strategy.end_task(model, prefix[t].train);
    if (t == 0) out.after_first = nn::dataset_mse(model, target.test);
  }
  out.after_prefix = nn::dataset_mse(model, target.test);
  out.delta = out.after_first - out.after_prefix;
  return out;
}

}  // namespace marq::bench

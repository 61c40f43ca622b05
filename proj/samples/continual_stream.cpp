// Trains one estimator incrementally over two synthetic tasks and prints the
// evaluation matrix plus the forgetting metrics.

#include <iostream>
#include <random>

#include "marq/bench/suite.hpp"
#include "marq/cl/strategy.hpp"
#include "marq/nn/features.hpp"

using namespace marq;

namespace {

bench::TaskData make_task(const std::string& id, double x_lo, double x_hi, double slope,
                          double offset, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(x_lo, x_hi);
  bench::TaskData task;
  task.task_id = id;
  for (int i = 0; i < 240; ++i) {
    nn::Sample s;
    s.x[1] = ux(rng);
    s.y = offset + slope * s.x[1];
    (i % 5 == 0 ? task.test : task.train).push_back(s);
  }
  return task;
}

}  // namespace

int main() {
  const std::vector<bench::TaskData> tasks = {
      make_task("A", 0.0, 0.4, 0.8, 0.1, 1),
      make_task("B", 0.6, 1.0, -0.6, 0.9, 2),
  };

  nn::TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 0.05;
  cfg.seed = 3;

  for (const std::string& name : cl::strategy_names()) {
    auto strategy = cl::make_strategy(name);
    nn::Model model = nn::init_model(cfg.seed, nn::default_norm_bounds());
    const auto result = bench::run_scenario_suite(tasks, *strategy, model, cfg);
    std::cout << name << ": plasticity " << bench::plasticity(result.matrix) << ", stability "
              << bench::stability(result.matrix) << "\n";
  }
  return 0;
}

// marq: feedback-based molecular communication simulator and
// continual-learning RTT estimation benchmark.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marq/cli/commands.hpp"
#include "marq/version.hpp"

namespace {

int dispatch(int argc, char** argv) {
  CLI::App app{"molecular SW-ARQ simulation and continual-learning RTT estimation"};
  app.set_version_flag("--version", std::string(marq::kVersion));
  app.require_subcommand(1);

  // simulate
  marq::cli::SimulateOptions sim_opt;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  auto* sim = app.add_subcommand("simulate", "run one ensemble of SW-ARQ simulations");
  sim->add_option("--config", sim_opt.config_path, "simulation settings JSON")->required();
  sim->add_option("--out", sim_opt.out_dir, "output directory")->required();
  sim->add_option("--runs", sim_opt.runs, "independent runs in the ensemble");
  sim->add_option("--seed", sim_seed, "override the seed in the config")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--parallelism", sim_opt.parallelism, "worker threads");
  sim->add_flag("--dump-world", sim_opt.dump_world, "write the initial world snapshot");

  // dataset
  marq::cli::DatasetOptions data_opt;
  auto* dataset = app.add_subcommand("dataset", "generate per-task datasets from a task sequence");
  dataset->add_option("--sequence", data_opt.sequence_path, "task sequence JSON")->required();
  dataset->add_option("--out", data_opt.out_dir, "output directory")->required();
  dataset->add_option("--seed", data_opt.seed, "base seed");
  dataset->add_option("--parallelism", data_opt.parallelism, "worker threads");

  // train
  marq::cli::TrainOptions train_opt;
  auto* train = app.add_subcommand("train", "train an estimator through the task stream");
  train->add_option("--strategy", train_opt.strategy, "baseline|lwf|ewc|clear|der")
      ->check(CLI::IsMember(marq::cl::strategy_names()));
  train->add_option("--sequence", train_opt.sequence_path, "task sequence JSON")->required();
  train->add_option("--data", train_opt.data_dir, "directory with per-task CSV datasets")->required();
  train->add_option("--out", train_opt.out_dir, "output directory")->required();
  train->add_option("--config", train_opt.config_path, "train/hyperparams/norm overrides JSON");
  train->add_option("--seed", train_opt.seed, "training seed");
  train->add_option("--resume", train_opt.resume_dir, "directory with checkpoints to resume from");
  train->add_option("--resume-task", train_opt.resume_task, "resume after this 1-based task");
  train->add_flag("--indirect", train_opt.indirect,
                  "treat the last task as an untrained target and report the indirect-learning delta");

  // report
  marq::cli::ReportOptions report_opt;
  auto* report = app.add_subcommand("report", "summarize matrix/timing/indirect files");
  report->add_option("inputs", report_opt.inputs, "matrix.json / timing.json / indirect.json files")
      ->required();
  report->add_option("--out", report_opt.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? marq::cli::kExitOk : marq::cli::kExitConfig;
  }

  if (sim->parsed()) {
    if (sim_seed_set) sim_opt.seed = sim_seed;
    return marq::cli::cmd_simulate(sim_opt);
  }
  if (dataset->parsed()) return marq::cli::cmd_dataset(data_opt);
  if (train->parsed()) return marq::cli::cmd_train(train_opt);
  if (report->parsed()) return marq::cli::cmd_report(report_opt);
  return marq::cli::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const marq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return marq::cli::kExitConfig;
  } catch (const marq::PlacementError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return marq::cli::kExitConfig;
  } catch (const marq::InvalidSampleError& e) {
    std::cerr << "invalid sample: " << e.what() << "\n";
    return marq::cli::kExitInvalidSample;
  } catch (const marq::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return marq::cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return marq::cli::kExitUnknown;
  }
}

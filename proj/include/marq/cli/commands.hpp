#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/arq/simulation.hpp"
#include "marq/bench/dataset.hpp"
#include "marq/bench/suite.hpp"
#include "marq/bench/task.hpp"
#include "marq/cl/strategy.hpp"
#include "marq/nn/checkpoint.hpp"
#include "marq/nn/features.hpp"
#include "marq/version.hpp"

namespace marq::cli {

namespace fs = std::filesystem;

/// Exit codes: 0 success, 2 configuration errors, 3 data errors,
/// 4 invalid-sample aborts, 1 anything else.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnknown = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInvalidSample = 4;

inline nlohmann::json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot read ") + what + ": " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + " parse error in " + path + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

inline std::string config_hash(const nlohmann::json& config) {
  std::ostringstream os;
  os << std::hex << fnv1a64(config.dump());
  return os.str();
}

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Every command writes a manifest listing its artifacts. Timestamps live
/// only here; the data artifacts themselves are byte-identical across reruns
/// with the same seed.
inline void write_manifest(const fs::path& out_dir, const std::string& command,
                           const nlohmann::json& config, std::uint64_t seed,
                           const std::vector<std::string>& outputs) {
  nlohmann::json j{{"tool_version", kVersion},
                   {"command", command},
                   {"config_hash", config_hash(config)},
                   {"seed", seed},
                   {"created_at", iso_timestamp()},
                   {"outputs", outputs}};
  write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::int64_t runs = 500;
  int parallelism = 1;
  bool dump_world = false;
};

inline int cmd_simulate(const SimulateOptions& opt) {
  nlohmann::json config = read_json_file(opt.config_path, "simulation config");
  sim::SimSettings settings;
  try {
    settings = config.get<sim::SimSettings>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("simulation config schema error: " + std::string(e.what()));
  }
  if (opt.seed) settings.seed = *opt.seed;
  settings.validate();
  if (opt.runs < 1) throw ConfigError("--runs must be >= 1");

  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  const arq::EnsembleStats stats = arq::run_ensemble(settings, opt.runs, opt.parallelism);

  nlohmann::json detail = nlohmann::json::array();
  for (const arq::SimOutcome& o : stats.outcomes)
    detail.push_back({{"delivered", o.delivered},
                      {"rtt", o.rtt},
                      {"retransmissions", o.retransmissions}});
  nlohmann::json ensemble;
  to_json(ensemble, stats);
  ensemble["settings"] = settings;
  ensemble["runs_detail"] = std::move(detail);
  write_text_file(out_dir / "ensemble.json", ensemble.dump(2) + "\n");
  write_text_file(out_dir / "ensemble.csv",
                  arq::ensemble_csv_header() + "\n" + arq::ensemble_csv_row(settings, stats) + "\n");

  std::vector<std::string> outputs = {"ensemble.json", "ensemble.csv"};
  if (opt.dump_world) {
    const sim::World world = sim::init_world(settings);
    write_text_file(out_dir / "world.json", sim::world_snapshot(world, 0, 0.0).dump(2) + "\n");
    outputs.push_back("world.json");
  }
  write_manifest(out_dir, "simulate", config, settings.seed, outputs);

  std::cout << "simulate: " << stats.delivered << "/" << stats.runs << " delivered";
  if (stats.median_rtt) std::cout << ", median RTT " << *stats.median_rtt << " s";
  std::cout << "\n";
  arq::require_valid(stats);  // surfaces InvalidSample as a distinct exit code
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dataset

struct DatasetOptions {
  std::string sequence_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  int parallelism = 1;
};

inline int cmd_dataset(const DatasetOptions& opt) {
  const bench::TaskSequence sequence = bench::load_task_sequence(opt.sequence_path);
  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  std::vector<std::string> outputs;
  nlohmann::json log = nlohmann::json::array();
  for (const bench::TaskSpec& task : sequence.tasks) {
    const bench::GeneratedDataset gen = bench::generate_dataset(task, opt.seed, opt.parallelism);
    const bench::SplitDataset split = bench::split_dataset(
        gen.samples, task.test_fraction, derive_seed(opt.seed, "test-split:" + task.task_id));
    const std::string train_name = "task_" + task.task_id + "_train.csv";
    const std::string test_name = "task_" + task.task_id + "_test.csv";
    bench::write_dataset_csv(split.train, (out_dir / train_name).string());
    bench::write_dataset_csv(split.test, (out_dir / test_name).string());
    outputs.push_back(train_name);
    outputs.push_back(test_name);

    nlohmann::json dropped = nlohmann::json::array();
    for (const bench::DroppedPoint& d : gen.dropped)
      dropped.push_back({{"point", d.point}, {"delivery_rate", d.delivery_rate}});
    log.push_back({{"task_id", task.task_id},
                   {"grid_size", task.grid_size()},
                   {"samples", gen.samples.size()},
                   {"dropped", std::move(dropped)}});
    std::cout << "dataset: task " << task.task_id << " -> " << gen.samples.size() << " samples ("
              << gen.dropped.size() << " dropped)\n";
  }
  write_text_file(out_dir / "generation_log.json", log.dump(2) + "\n");
  outputs.push_back("generation_log.json");

  nlohmann::json config;
  to_json(config, sequence);
  write_manifest(out_dir, "dataset", config, opt.seed, outputs);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string strategy = "baseline";
  std::string sequence_path;
  std::string data_dir;
  std::string out_dir;
  std::string config_path;  // optional {train, hyperparams, norm} overrides
  std::uint64_t seed = 1;
  std::string resume_dir;   // optional: directory holding checkpoints of a previous run
  int resume_task = 0;      // resume after this task (1-based); 0 = fresh run
  bool indirect = false;    // treat the last task as an untrained target
};

struct TrainSetup {
  nn::TrainConfig train;
  cl::Hyperparams hyperparams;
  nn::NormBounds norm;
};

inline TrainSetup load_train_setup(const std::string& config_path, std::uint64_t seed) {
  TrainSetup setup;
  setup.norm = nn::default_norm_bounds();
  if (!config_path.empty()) {
    const nlohmann::json j = read_json_file(config_path, "train config");
    try {
      if (j.contains("train")) j.at("train").get_to(setup.train);
      if (j.contains("hyperparams")) j.at("hyperparams").get_to(setup.hyperparams);
      if (j.contains("norm")) j.at("norm").get_to(setup.norm);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("train config schema error: " + std::string(e.what()));
    }
  }
  setup.train.seed = seed;
  setup.train.validate();
  setup.hyperparams.validate();
  setup.norm.validate();
  return setup;
}

inline std::vector<bench::TaskData> load_task_data(const bench::TaskSequence& sequence,
                                                   const std::string& data_dir,
                                                   const nn::NormBounds& norm) {
  std::vector<bench::TaskData> tasks;
  for (const bench::TaskSpec& spec : sequence.tasks) {
    const fs::path dir(data_dir);
    bench::TaskData data;
    data.task_id = spec.task_id;
    data.train = nn::normalize_dataset(
        norm, bench::read_dataset_csv((dir / ("task_" + spec.task_id + "_train.csv")).string()));
    data.test = nn::normalize_dataset(
        norm, bench::read_dataset_csv((dir / ("task_" + spec.task_id + "_test.csv")).string()));
    tasks.push_back(std::move(data));
  }
  return tasks;
}

inline int cmd_train(const TrainOptions& opt) {
  const bench::TaskSequence sequence = bench::load_task_sequence(opt.sequence_path);
  const TrainSetup setup = load_train_setup(opt.config_path, opt.seed);
  const std::vector<bench::TaskData> tasks = load_task_data(sequence, opt.data_dir, setup.norm);

  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);
  auto strategy = cl::make_strategy(opt.strategy, setup.hyperparams);

  nlohmann::json config{{"strategy", opt.strategy},
                        {"train", setup.train},
                        {"hyperparams", setup.hyperparams},
                        {"norm", setup.norm}};
  std::vector<std::string> outputs;

  if (opt.indirect) {
    if (tasks.size() < 2) throw ConfigError("--indirect needs at least two tasks (prefix + target)");
    std::vector<bench::TaskData> prefix(tasks.begin(), tasks.end() - 1);
    nn::Model model = nn::init_model(opt.seed, setup.norm);
    const bench::IndirectResult res =
        bench::indirect_learning(prefix, tasks.back(), *strategy, model, setup.train);
    nlohmann::json j{{"strategy", opt.strategy},
                     {"seed", opt.seed},
                     {"target", tasks.back().task_id},
                     {"after_first", res.after_first},
                     {"after_prefix", res.after_prefix},
                     {"delta", res.delta}};
    nlohmann::json prefix_ids = nlohmann::json::array();
    for (const auto& p : prefix) prefix_ids.push_back(p.task_id);
    j["prefix"] = std::move(prefix_ids);
    write_text_file(out_dir / "indirect.json", j.dump(2) + "\n");
    write_manifest(out_dir, "train", config, opt.seed, {"indirect.json"});
    std::cout << "indirect: delta " << res.delta << " on target " << tasks.back().task_id << "\n";
    return kExitOk;
  }

  nn::Model model = nn::init_model(opt.seed, setup.norm);
  bench::EvalMatrix partial;
  int start_task = 1;
  if (opt.resume_task > 0) {
    if (opt.resume_dir.empty()) throw ConfigError("--resume-task requires --resume");
    for (int k = 1; k <= opt.resume_task; ++k) {
      const fs::path ck = fs::path(opt.resume_dir) / ("checkpoint_task" + std::to_string(k) + ".json");
      const nlohmann::json j = read_json_file(ck.string(), "checkpoint");
      if (k == opt.resume_task) {
        nn::LoadedCheckpoint loaded = nn::checkpoint_from_json(j);
        model = std::move(loaded.model);
        if (!loaded.strategy_kind.empty()) {
          if (loaded.strategy_kind != opt.strategy)
            throw ConfigError("checkpoint strategy '" + loaded.strategy_kind +
                              "' does not match --strategy '" + opt.strategy + "'");
          strategy->load_state(loaded.strategy_state);
        }
      }
      partial.append_row(j.at("row").get<std::vector<double>>());
    }
    start_task = opt.resume_task + 1;
  }

  const bench::TaskHook hook = [&](int task_index, const nn::Model& m,
                                   const std::vector<double>& row) {
    nlohmann::json j = nn::checkpoint_json(m, strategy->name(), strategy->state_json());
    j["task_index"] = task_index;
    j["task_id"] = tasks[static_cast<std::size_t>(task_index - 1)].task_id;
    j["row"] = row;
    const std::string name = "checkpoint_task" + std::to_string(task_index) + ".json";
    write_text_file(out_dir / name, j.dump(2) + "\n");
    outputs.push_back(name);
  };

  const bench::SuiteResult result =
      run_scenario_suite(tasks, *strategy, model, setup.train, hook, start_task, partial);

  nlohmann::json task_ids = nlohmann::json::array();
  for (const auto& t : tasks) task_ids.push_back(t.task_id);

  nlohmann::json matrix = bench::metrics_json(result.matrix);
  matrix["strategy"] = opt.strategy;
  matrix["seed"] = opt.seed;
  matrix["task_ids"] = task_ids;
  write_text_file(out_dir / "matrix.json", matrix.dump(2) + "\n");
  outputs.push_back("matrix.json");

  double total = 0.0;
  for (double s : result.task_seconds) total += s;
  nlohmann::json timing{{"strategy", opt.strategy},
                        {"seed", opt.seed},
                        {"task_seconds", result.task_seconds},
                        {"total_seconds", total}};
  write_text_file(out_dir / "timing.json", timing.dump(2) + "\n");
  outputs.push_back("timing.json");

  write_manifest(out_dir, "train", config, opt.seed, outputs);
  std::cout << "train: " << opt.strategy << " through " << tasks.size()
            << " tasks, stability " << bench::stability(result.matrix) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::vector<std::string> inputs;  // matrix.json / timing.json / indirect.json files
  std::string out_dir;
};

inline int cmd_report(const ReportOptions& opt) {
  if (opt.inputs.empty()) throw ConfigError("report: no input files");
  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);

  struct Run {
    std::uint64_t seed = 0;
    bench::EvalMatrix matrix;
    double total_seconds = -1.0;
    std::size_t task_count = 0;
  };
  std::map<std::string, std::vector<Run>> runs;                       // strategy -> runs
  std::map<std::pair<std::string, std::uint64_t>, nlohmann::json> timings;
  std::vector<nlohmann::json> indirect;

  for (const std::string& path : opt.inputs) {
    const nlohmann::json j = read_json_file(path, "report input");
    if (j.contains("matrix")) {
      Run r;
      r.seed = j.value("seed", std::uint64_t{0});
      j.at("matrix").get_to(r.matrix);
      r.task_count = r.matrix.task_count();
      runs[j.value("strategy", std::string("unknown"))].push_back(std::move(r));
    } else if (j.contains("task_seconds")) {
      timings[{j.value("strategy", std::string("unknown")), j.value("seed", std::uint64_t{0})}] = j;
    } else if (j.contains("delta")) {
      indirect.push_back(j);
    } else {
      throw DataError("report: unrecognized input file " + path);
    }
  }
  if (runs.empty() && indirect.empty()) throw DataError("report: no usable inputs");

  // Metrics are recomputed from the raw matrices; stored scalars are ignored.
  std::ostringstream summary;
  summary << "strategy,runs,plasticity_mean,plasticity_std,stability_mean,stability_std,"
             "increase_rate_mean,increase_rate_std,total_time_mean,per_task_time_mean\n";
  std::ostringstream fig4;
  fig4 << "strategy,seed,stability,total_seconds\n";
  std::ostringstream fig5;
  fig5 << "strategy,K,forgetting_ratio_mean,forgetting_ratio_std\n";

  for (const auto& [strategy, rs] : runs) {
    std::vector<double> plast, stab, rate, totals;
    std::size_t tasks = 0;
    for (const Run& r : rs) {
      plast.push_back(bench::plasticity(r.matrix));
      stab.push_back(bench::stability(r.matrix));
      rate.push_back(bench::increase_rate(r.matrix));
      tasks = std::max(tasks, r.task_count);
      double total = -1.0;
      if (auto it = timings.find({strategy, r.seed}); it != timings.end()) {
        total = 0.0;
        for (const auto& s : it->second.at("task_seconds")) total += s.get<double>();
      }
      totals.push_back(total);
      fig4 << strategy << ',' << r.seed << ',' << format_double(stab.back()) << ','
           << (total >= 0.0 ? format_double(total) : std::string()) << '\n';
    }
    std::vector<double> valid_totals;
    for (double t : totals)
      if (t >= 0.0) valid_totals.push_back(t);
    const double time_mean = valid_totals.empty() ? 0.0 : mean(valid_totals);
    summary << strategy << ',' << rs.size() << ',' << format_double(mean(plast)) << ','
            << format_double(stddev(plast)) << ',' << format_double(mean(stab)) << ','
            << format_double(stddev(stab)) << ',' << format_double(mean(rate)) << ','
            << format_double(stddev(rate)) << ',' << format_double(time_mean) << ','
            << format_double(tasks ? time_mean / static_cast<double>(tasks) : 0.0) << '\n';

    // F_r curves per prefix K, averaged across runs of this strategy.
    for (std::size_t K = 2; K <= tasks; ++K) {
      std::vector<double> frs;
      for (const Run& r : rs)
        if (K <= r.task_count) frs.push_back(bench::forgetting_ratio(r.matrix, K));
      if (!frs.empty())
        fig5 << strategy << ',' << K << ',' << format_double(mean(frs)) << ','
             << format_double(stddev(frs)) << '\n';
    }
  }

  std::vector<std::string> outputs;
  if (!runs.empty()) {
    write_text_file(out_dir / "summary.csv", summary.str());
    write_text_file(out_dir / "fig4_stability_vs_time.csv", fig4.str());
    write_text_file(out_dir / "fig5_forgetting_ratio.csv", fig5.str());
    outputs = {"summary.csv", "fig4_stability_vs_time.csv", "fig5_forgetting_ratio.csv"};
  }

  if (!indirect.empty()) {
    std::ostringstream t5;
    t5 << "strategy,seed,prefix,target,after_first,after_prefix,delta\n";
    for (const nlohmann::json& j : indirect) {
      std::string prefix;
      for (const auto& p : j.value("prefix", nlohmann::json::array())) {
        if (!prefix.empty()) prefix += '>';
        prefix += p.get<std::string>();
      }
      t5 << j.value("strategy", std::string("unknown")) << ',' << j.value("seed", std::uint64_t{0})
         << ',' << prefix << ',' << j.value("target", std::string()) << ','
         << format_double(j.value("after_first", 0.0)) << ','
         << format_double(j.value("after_prefix", 0.0)) << ','
         << format_double(j.value("delta", 0.0)) << '\n';
    }
    write_text_file(out_dir / "table5_indirect.csv", t5.str());
    outputs.push_back("table5_indirect.csv");
  }

  nlohmann::json config{{"inputs", opt.inputs}};
  write_manifest(out_dir, "report", config, 0, outputs);
  std::cout << "report: wrote " << outputs.size() << " files to " << opt.out_dir << "\n";
  return kExitOk;
}

}  // namespace marq::cli

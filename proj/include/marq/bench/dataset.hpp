#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marq/arq/simulation.hpp"
#include "marq/bench/task.hpp"
#include "marq/nn/features.hpp"
#include "marq/nn/train.hpp"

namespace marq::bench {

struct DroppedPoint {
  std::size_t point = 0;
  double delivery_rate = 0.0;
};

struct GeneratedDataset {
  nn::Dataset samples;  // raw (unnormalized) features, median RTT target in seconds
  std::vector<DroppedPoint> dropped;
};

/// Runs the ensemble for every grid point of the task and turns each valid
/// median into one sample. Points whose delivery rate falls below 0.5 are
/// dropped and reported. Deterministic given the seed.
inline GeneratedDataset generate_dataset(const TaskSpec& task, std::uint64_t seed,
                                         int parallelism = 1) {
  task.validate();
  GeneratedDataset out;
  for (std::size_t point = 0; point < task.grid_size(); ++point) {
    const std::uint64_t point_seed = derive_seed(seed, "dataset:" + task.task_id, point);
    const sim::SimSettings settings = task.settings_for(point, point_seed);
    const arq::EnsembleStats stats = arq::run_ensemble(settings, task.runs_per_point, parallelism);
    if (!stats.valid || !stats.median_rtt) {
      out.dropped.push_back({point, stats.delivery_rate});
      continue;
    }
    out.samples.push_back({nn::encode_features(settings), *stats.median_rtt});
  }
  if (out.samples.empty())
    throw DataError("generate_dataset: every grid point of task " + task.task_id +
                    " was invalid (delivery rate < 0.5)");
  return out;
}

/// Seeded train/test holdout, frozen at generation time.
struct SplitDataset {
  nn::Dataset train;
  nn::Dataset test;
};

inline SplitDataset split_dataset(const nn::Dataset& all, double test_fraction, std::uint64_t seed) {
  SplitDataset out;
  if (all.size() < 2) {
    out.train = all;
    out.test = all;
    return out;
  }
  auto [test_idx, train_idx] = nn::split_indices(all.size(), test_fraction, seed);
  for (std::size_t i : test_idx) out.test.push_back(all[i]);
  for (std::size_t i : train_idx) out.train.push_back(all[i]);
  return out;
}

inline std::string dataset_csv_header() {
  std::ostringstream os;
  for (const std::string& name : nn::feature_names()) os << name << ',';
  os << "median_rtt";
  return os.str();
}

inline void write_dataset_csv(const nn::Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset: " + path);
  out << dataset_csv_header() << '\n';
  for (const nn::Sample& s : data) {
    for (double v : s.x) out << format_double(v) << ',';
    out << format_double(s.y) << '\n';
  }
}

inline nn::Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file: " + path);
  if (line != dataset_csv_header())
    throw DataError("dataset header mismatch in " + path + ": got '" + line + "'");
  nn::Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    nn::Sample s;
    for (int i = 0; i < nn::kInputDim; ++i) {
      if (!std::getline(row, cell, ','))
        throw DataError("short row at " + path + ":" + std::to_string(lineno));
      s.x[static_cast<std::size_t>(i)] = std::stod(cell);
    }
    if (!std::getline(row, cell, ','))
      throw DataError("missing target at " + path + ":" + std::to_string(lineno));
    s.y = std::stod(cell);
    data.push_back(s);
  }
  if (data.empty()) throw DataError("dataset has no rows: " + path);
  return data;
}

}  // namespace marq::bench

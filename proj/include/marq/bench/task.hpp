#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/common.hpp"
#include "marq/sim/settings.hpp"

namespace marq::bench {

/// One estimation task: a grid of experimental settings (distance x noise
/// level) under a fixed transport and protocol configuration. Every grid
/// point becomes one training/test sample via an ensemble median.
struct TaskSpec {
  std::string task_id;
  sim::Transport transport = sim::Transport::Diffusive;
  std::vector<double> distances;
  std::vector<std::int64_t> noise_counts;
  std::int64_t n = 10;  // duplicated molecules per burst
  double rto = 60.0;
  std::int64_t max_retx = 5;
  std::int64_t runs_per_point = 500;
  double test_fraction = 0.2;
  sim::SimSettings base;  // remaining physical parameters (env size, D, motor, dt)

  std::size_t grid_size() const { return distances.size() * noise_counts.size(); }

  void validate() const {
    if (task_id.empty()) throw ConfigError("task_id must be nonempty");
    if (distances.empty() || noise_counts.empty()) throw ConfigError("task grid must be nonempty");
    if (runs_per_point < 1) throw ConfigError("runs_per_point must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
      throw ConfigError("test_fraction must be in (0,1)");
    for (std::size_t p = 0; p < grid_size(); ++p) settings_for(p, 0).validate();
  }

  /// Grid order: distances outer, noise counts inner.
  sim::SimSettings settings_for(std::size_t point, std::uint64_t seed) const {
    sim::SimSettings s = base;
    s.transport = transport;
    s.tx_rx_distance = distances[point / noise_counts.size()];
    s.noise_count = noise_counts[point % noise_counts.size()];
    s.duplicates = n;
    s.rto = rto;
    s.max_retx = max_retx;
    s.seed = seed;
    return s;
  }
};

inline void to_json(nlohmann::json& j, const TaskSpec& t) {
  j = nlohmann::json{{"task_id", t.task_id},
                     {"transport", sim::to_string(t.transport)},
                     {"distances", t.distances},
                     {"noise_counts", t.noise_counts},
                     {"n", t.n},
                     {"rto", t.rto},
                     {"max_retx", t.max_retx},
                     {"runs_per_point", t.runs_per_point},
                     {"test_fraction", t.test_fraction},
                     {"base", t.base}};
}

inline void from_json(const nlohmann::json& j, TaskSpec& t) {
  TaskSpec d;
  t.task_id = j.at("task_id").get<std::string>();
  t.transport = sim::transport_from_string(j.at("transport").get<std::string>());
  j.at("distances").get_to(t.distances);
  j.at("noise_counts").get_to(t.noise_counts);
  t.n = j.value("n", d.n);
  t.rto = j.at("rto").get<double>();
  t.max_retx = j.value("max_retx", d.max_retx);
  t.runs_per_point = j.value("runs_per_point", d.runs_per_point);
  t.test_fraction = j.value("test_fraction", d.test_fraction);
  if (j.contains("base")) j.at("base").get_to(t.base);
}

struct TaskSequence {
  std::vector<TaskSpec> tasks;

  void validate() const {
    if (tasks.empty()) throw ConfigError("task sequence must contain at least one task");
    for (const TaskSpec& t : tasks) t.validate();
    for (std::size_t i = 0; i < tasks.size(); ++i)
      for (std::size_t k = i + 1; k < tasks.size(); ++k)
        if (tasks[i].task_id == tasks[k].task_id)
          throw ConfigError("duplicate task_id: " + tasks[i].task_id);
  }
};

inline void to_json(nlohmann::json& j, const TaskSequence& s) {
  j = nlohmann::json{{"tasks", s.tasks}};
}

inline void from_json(const nlohmann::json& j, TaskSequence& s) {
  j.at("tasks").get_to(s.tasks);
  s.validate();
}

inline TaskSequence load_task_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read task sequence: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("task sequence parse error in " + path + ": " + e.what());
  }
  try {
    return j.get<TaskSequence>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("task sequence schema error in " + path + ": " + e.what());
  }
}

}  // namespace marq::bench

#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "marq/arq/engine.hpp"
#include "marq/common.hpp"
#include "marq/sim/motion.hpp"
#include "marq/sim/world.hpp"

namespace marq::arq {

/// Channel backed by the particle simulation.
class PhysicsChannel : public Channel {
 public:
  explicit PhysicsChannel(const sim::SimSettings& settings)
      : world_(sim::init_world(settings)), rng_(derive_seed(settings.seed, "run")) {}

  void release_info(std::int64_t /*step*/, int /*burst*/) override {
    sim::release_burst(world_, sim::MolKind::Info, 0, rng_);
  }

  void release_ack(std::int64_t /*step*/, int /*burst*/) override {
    sim::release_burst(world_, sim::MolKind::Ack, 0, rng_);
  }

  StepEvents step(std::int64_t /*step*/) override {
    sim::step_molecules(world_, rng_);
    StepEvents ev;
    for (const sim::Arrival& a : sim::detect_arrivals(world_)) {
      if (a.kind == sim::MolKind::Info)
        ++ev.info_at_rx;
      else
        ++ev.ack_at_tx;
    }
    return ev;
  }

  const sim::World& world() const { return world_; }

 private:
  sim::World world_;
  Rng rng_;
};

/// One full stop-and-wait exchange over the simulated physics.
inline SimOutcome run_simulation(const sim::SimSettings& settings) {
  settings.validate();
  PhysicsChannel channel(settings);
  return run_message(channel, ArqParams{settings.rto, settings.max_retx, settings.dt});
}

struct EnsembleStats {
  std::int64_t runs = 0;
  std::int64_t delivered = 0;
  double delivery_rate = 0.0;
  std::optional<double> median_rtt;
  std::optional<double> q1;
  std::optional<double> q3;
  bool valid = false;  // false when the delivery rate is below 0.5
  std::vector<SimOutcome> outcomes;  // in run-index order
};

inline void to_json(nlohmann::json& j, const EnsembleStats& s) {
  j = nlohmann::json{{"runs", s.runs},
                     {"delivered", s.delivered},
                     {"delivery_rate", s.delivery_rate},
                     {"median_rtt", s.median_rtt ? nlohmann::json(*s.median_rtt) : nlohmann::json()},
                     {"q1", s.q1 ? nlohmann::json(*s.q1) : nlohmann::json()},
                     {"q3", s.q3 ? nlohmann::json(*s.q3) : nlohmann::json()},
                     {"valid", s.valid}};
}

/// Executes `runs` independent simulations (per-run seed = base seed + run
/// index) and reduces them in run-index order, so the result is independent
/// of scheduling. The sample is flagged invalid when fewer than half of the
/// runs deliver; use require_valid() to turn that flag into an error.
inline EnsembleStats run_ensemble(const sim::SimSettings& settings, std::int64_t runs,
                                  int parallelism = 1) {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  settings.validate();

  std::vector<SimOutcome> outcomes(static_cast<std::size_t>(runs));
  auto worker = [&](std::atomic<std::int64_t>& next) {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= runs) return;
      sim::SimSettings s = settings;
      s.seed = settings.seed + static_cast<std::uint64_t>(i);
      outcomes[static_cast<std::size_t>(i)] = run_simulation(s);
    }
  };

  std::atomic<std::int64_t> next{0};
  if (parallelism <= 1) {
    worker(next);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(parallelism));
    for (int i = 0; i < parallelism; ++i) threads.emplace_back([&] { worker(next); });
    for (auto& t : threads) t.join();
  }

  EnsembleStats stats;
  stats.runs = runs;
  std::vector<double> delivered_rtts;
  for (const SimOutcome& o : outcomes) {
    if (o.delivered) {
      ++stats.delivered;
      delivered_rtts.push_back(o.rtt);
    }
  }
  stats.delivery_rate = static_cast<double>(stats.delivered) / static_cast<double>(runs);
  stats.valid = stats.delivery_rate >= 0.5;
  if (!delivered_rtts.empty()) {
    stats.median_rtt = quantile(delivered_rtts, 0.5);
    stats.q1 = quantile(delivered_rtts, 0.25);
    stats.q3 = quantile(delivered_rtts, 0.75);
  }
  stats.outcomes = std::move(outcomes);
  return stats;
}

inline const EnsembleStats& require_valid(const EnsembleStats& stats) {
  if (!stats.valid)
    throw InvalidSampleError("delivery rate " + format_double(stats.delivery_rate) +
                             " is below 0.5; the median would be censored");
  return stats;
}

inline std::string ensemble_csv_header() {
  return "env_side,tx_rx_distance,noise_count,transport,duplicates,rto,max_retx,"
         "diffusion_coeff,motor_velocity,motor_travel_mean,dt,seed,runs,"
         "median_rtt,delivery_rate,q1,q3";
}

inline std::string ensemble_csv_row(const sim::SimSettings& s, const EnsembleStats& st) {
  std::ostringstream os;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << format_double(s.env_side) << ',' << format_double(s.tx_rx_distance) << ','
     << s.noise_count << ',' << sim::to_string(s.transport) << ',' << s.duplicates << ','
     << format_double(s.rto) << ',' << s.max_retx << ',' << format_double(s.diffusion_coeff)
     << ',' << format_double(s.motor_velocity) << ',' << format_double(s.motor_travel_mean)
     << ',' << format_double(s.dt) << ',' << s.seed << ',' << st.runs << ','
     << opt(st.median_rtt) << ',' << format_double(st.delivery_rate) << ',' << opt(st.q1) << ','
     << opt(st.q3);
  return os.str();
}

}  // namespace marq::arq

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "marq/common.hpp"

namespace marq::sim {

enum class Transport { Diffusive, Directional, Hybrid };

inline std::string to_string(Transport t) {
  switch (t) {
    case Transport::Diffusive: return "diffusive";
    case Transport::Directional: return "directional";
    case Transport::Hybrid: return "hybrid";
  }
  return "diffusive";
}

inline Transport transport_from_string(const std::string& s) {
  if (s == "diffusive") return Transport::Diffusive;
  if (s == "directional") return Transport::Directional;
  if (s == "hybrid") return Transport::Hybrid;
  throw ConfigError("unknown transport: " + s);
}

/// Full physical and protocol parameterization of one simulation run.
/// Lengths in micrometers, times in seconds.
struct SimSettings {
  double env_side = 150.0;
  double tx_rx_distance = 10.0;
  double tx_diameter = 5.0;
  double rx_diameter = 5.0;
  double mol_diameter = 1.0;
  std::int64_t noise_count = 0;
  double noise_diameter = 1.0;
  double diffusion_coeff = 0.5;       // per-dimension, um^2/s
  double motor_velocity = 1.0;        // um/s
  double motor_travel_mean = 4.0;     // um, mean of the exponential travel budget
  bool motor_travel_fixed = false;    // fixed-distance detachment instead of exponential
  Transport transport = Transport::Diffusive;
  std::int64_t duplicates = 10;       // n copies per burst
  double rto = 60.0;                  // retransmission timeout, s
  std::int64_t max_retx = 5;
  double dt = 0.1;                    // time step, s
  std::uint64_t seed = 1;

  double tx_radius() const { return 0.5 * tx_diameter; }
  double rx_radius() const { return 0.5 * rx_diameter; }
  double mol_radius() const { return 0.5 * mol_diameter; }
  double noise_radius() const { return 0.5 * noise_diameter; }

  /// Throws ConfigError when any invariant is violated.
  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(env_side, "env_side");
    positive(tx_rx_distance, "tx_rx_distance");
    positive(tx_diameter, "tx_diameter");
    positive(rx_diameter, "rx_diameter");
    positive(mol_diameter, "mol_diameter");
    positive(noise_diameter, "noise_diameter");
    positive(diffusion_coeff, "diffusion_coeff");
    positive(motor_velocity, "motor_velocity");
    positive(motor_travel_mean, "motor_travel_mean");
    positive(rto, "rto");
    positive(dt, "dt");
    if (noise_count < 0) throw ConfigError("noise_count must be >= 0");
    if (duplicates < 1) throw ConfigError("duplicates must be >= 1");
    if (max_retx < 0) throw ConfigError("max_retx must be >= 0");
    if (tx_rx_distance + 0.5 * tx_diameter + 0.5 * rx_diameter >= env_side)
      throw ConfigError("Tx and Rx do not fit inside the environment");
  }
};

inline void to_json(nlohmann::json& j, const SimSettings& s) {
  j = nlohmann::json{{"env_side", s.env_side},
                     {"tx_rx_distance", s.tx_rx_distance},
                     {"tx_diameter", s.tx_diameter},
                     {"rx_diameter", s.rx_diameter},
                     {"mol_diameter", s.mol_diameter},
                     {"noise_count", s.noise_count},
                     {"noise_diameter", s.noise_diameter},
                     {"diffusion_coeff", s.diffusion_coeff},
                     {"motor_velocity", s.motor_velocity},
                     {"motor_travel_mean", s.motor_travel_mean},
                     {"motor_travel_fixed", s.motor_travel_fixed},
                     {"transport", to_string(s.transport)},
                     {"duplicates", s.duplicates},
                     {"rto", s.rto},
                     {"max_retx", s.max_retx},
                     {"dt", s.dt},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, SimSettings& s) {
  SimSettings d;
  s.env_side = j.value("env_side", d.env_side);
  s.tx_rx_distance = j.value("tx_rx_distance", d.tx_rx_distance);
  s.tx_diameter = j.value("tx_diameter", d.tx_diameter);
  s.rx_diameter = j.value("rx_diameter", d.rx_diameter);
  s.mol_diameter = j.value("mol_diameter", d.mol_diameter);
  s.noise_count = j.value("noise_count", d.noise_count);
  s.noise_diameter = j.value("noise_diameter", d.noise_diameter);
  s.diffusion_coeff = j.value("diffusion_coeff", d.diffusion_coeff);
  s.motor_velocity = j.value("motor_velocity", d.motor_velocity);
  s.motor_travel_mean = j.value("motor_travel_mean", d.motor_travel_mean);
  s.motor_travel_fixed = j.value("motor_travel_fixed", d.motor_travel_fixed);
  if (j.contains("transport")) s.transport = transport_from_string(j.at("transport").get<std::string>());
  s.duplicates = j.value("duplicates", d.duplicates);
  s.rto = j.value("rto", d.rto);
  s.max_retx = j.value("max_retx", d.max_retx);
  s.dt = j.value("dt", d.dt);
  s.seed = j.value("seed", d.seed);
}

}  // namespace marq::sim

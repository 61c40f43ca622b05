#pragma once

#include <array>
#include <cmath>
#include <string>

#include <json.hpp>

#include "marq/nn/model.hpp"
#include "marq/sim/settings.hpp"

namespace marq::nn {

/// Column order of the 12-entry feature vector. The noise count is log-scaled
/// (log10(1+c)) before min-max normalization because the raw 0..1e5 range is
/// degenerate near zero; the transport choice is a 3-way one-hot block.
inline const std::array<std::string, kInputDim>& feature_names() {
  static const std::array<std::string, kInputDim> names = {
      "env_side",          "tx_rx_distance", "log10_noise",      "transport_diffusive",
      "transport_directional", "transport_hybrid", "duplicates", "rto",
      "max_retx",          "diffusion_coeff", "motor_velocity",  "motor_travel_mean"};
  return names;
}

/// Encodes simulation settings into the (unnormalized) 12-feature vector.
inline Features encode_features(const sim::SimSettings& s) {
  Features f{};
  f[0] = s.env_side;
  f[1] = s.tx_rx_distance;
  f[2] = std::log10(1.0 + static_cast<double>(s.noise_count));
  f[3] = s.transport == sim::Transport::Diffusive ? 1.0 : 0.0;
  f[4] = s.transport == sim::Transport::Directional ? 1.0 : 0.0;
  f[5] = s.transport == sim::Transport::Hybrid ? 1.0 : 0.0;
  f[6] = static_cast<double>(s.duplicates);
  f[7] = s.rto;
  f[8] = static_cast<double>(s.max_retx);
  f[9] = s.diffusion_coeff;
  f[10] = s.motor_velocity;
  f[11] = s.motor_travel_mean;
  return f;
}

/// Global normalization ranges. They cover the parameter ranges the protocol
/// is examined under; values outside are clamped into [0,1].
inline NormBounds default_norm_bounds() {
  NormBounds b;
  b.lo = {50.0, 5.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.05, 0.1, 0.5};
  b.hi = {300.0, 100.0, std::log10(1.0 + 1e5), 1.0, 1.0, 1.0, 50.0, 5000.0, 10.0, 5.0, 10.0, 40.0};
  b.y_lo = 0.0;
  b.y_hi = 15000.0;  // rtt_max, configurable
  return b;
}

inline void to_json(nlohmann::json& j, const NormBounds& b) {
  j = nlohmann::json{{"feature_lo", b.lo}, {"feature_hi", b.hi}, {"y_lo", b.y_lo}, {"y_hi", b.y_hi}};
}

inline void from_json(const nlohmann::json& j, NormBounds& b) {
  NormBounds d = default_norm_bounds();
  b = d;
  if (j.contains("feature_lo")) j.at("feature_lo").get_to(b.lo);
  if (j.contains("feature_hi")) j.at("feature_hi").get_to(b.hi);
  b.y_lo = j.value("y_lo", d.y_lo);
  b.y_hi = j.value("y_hi", d.y_hi);
  b.validate();
}

/// Normalizes a raw-feature sample with the global bounds.
inline Sample normalize_sample(const NormBounds& b, const Sample& raw) {
  Sample out;
  out.x = b.normalize(raw.x);
  out.y = b.normalize_target(raw.y);
  return out;
}

inline Dataset normalize_dataset(const NormBounds& b, const Dataset& raw) {
  Dataset out;
  out.reserve(raw.size());
  for (const Sample& s : raw) out.push_back(normalize_sample(b, s));
  return out;
}

/// End-to-end RTT estimate (seconds) for a settings vector.
inline double estimate_rtt(const Model& m, const sim::SimSettings& s) {
  const Features raw = encode_features(s);
  return m.norm.denormalize_target(predict(m, m.norm.normalize(raw)));
}

}  // namespace marq::nn

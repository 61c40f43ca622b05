#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "marq/nn/features.hpp"
#include "marq/nn/model.hpp"
#include "marq/nn/train.hpp"

namespace marq::nn {

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON checkpoint: model weights with explicit shape metadata,
/// normalization constants, and (optionally) the attached strategy state so a
/// task stream can resume mid-sequence. Round-trips are bit-exact.
inline nlohmann::json checkpoint_json(const Model& m, const std::string& strategy_name = "",
                                      const nlohmann::json& strategy_state = {}) {
  nlohmann::json w1 = nlohmann::json::array();
  for (int h = 0; h < kHiddenDim; ++h) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < kInputDim; ++i) row.push_back(m.w1[static_cast<std::size_t>(h) * kInputDim + static_cast<std::size_t>(i)]);
    w1.push_back(std::move(row));
  }
  nlohmann::json j{{"version", kCheckpointVersion},
                   {"dims", {{"input", kInputDim}, {"hidden", kHiddenDim}, {"output", 1}}},
                   {"W1", std::move(w1)},
                   {"b1", m.b1},
                   {"W2", nlohmann::json::array({m.w2})},
                   {"b2", m.b2},
                   {"norm", m.norm}};
  if (!strategy_name.empty())
    j["strategy_state"] = nlohmann::json{{"kind", strategy_name}, {"state", strategy_state}};
  return j;
}

inline void save_checkpoint(const Model& m, const std::string& path,
                            const std::string& strategy_name = "",
                            const nlohmann::json& strategy_state = {}) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << checkpoint_json(m, strategy_name, strategy_state).dump(2) << '\n';
}

struct LoadedCheckpoint {
  Model model;
  std::string strategy_kind;       // empty when none stored
  nlohmann::json strategy_state;
};

inline LoadedCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kCheckpointVersion)
    throw DataError("checkpoint: unsupported or missing schema version");
  const auto& dims = j.at("dims");
  if (dims.at("input").get<int>() != kInputDim || dims.at("hidden").get<int>() != kHiddenDim ||
      dims.at("output").get<int>() != 1)
    throw DataError("checkpoint: dimension mismatch");

  LoadedCheckpoint out;
  const auto& w1 = j.at("W1");
  if (w1.size() != kHiddenDim) throw DataError("checkpoint: W1 row count mismatch");
  for (int h = 0; h < kHiddenDim; ++h) {
    const auto& row = w1.at(static_cast<std::size_t>(h));
    if (row.size() != kInputDim) throw DataError("checkpoint: W1 column count mismatch");
    for (int i = 0; i < kInputDim; ++i)
      out.model.w1[static_cast<std::size_t>(h) * kInputDim + static_cast<std::size_t>(i)] = row.at(static_cast<std::size_t>(i)).get<double>();
  }
  j.at("b1").get_to(out.model.b1);
  if (out.model.b1.size() != kHiddenDim) throw DataError("checkpoint: b1 size mismatch");
  const auto& w2 = j.at("W2");
  if (w2.size() != 1) throw DataError("checkpoint: W2 row count mismatch");
  w2.at(0).get_to(out.model.w2);
  if (out.model.w2.size() != kHiddenDim) throw DataError("checkpoint: W2 column count mismatch");
  out.model.b2 = j.at("b2").get<double>();
  j.at("norm").get_to(out.model.norm);
  if (j.contains("strategy_state")) {
    out.strategy_kind = j.at("strategy_state").at("kind").get<std::string>();
    out.strategy_state = j.at("strategy_state").value("state", nlohmann::json::object());
  }
  return out;
}

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint parse error in " + path + ": " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint schema error in " + path + ": " + e.what());
  }
}

}  // namespace marq::nn

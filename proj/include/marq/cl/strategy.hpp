#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "marq/cl/baseline.hpp"
#include "marq/cl/clear.hpp"
#include "marq/cl/der.hpp"
#include "marq/cl/ewc.hpp"
#include "marq/cl/lwf.hpp"

namespace marq::cl {

/// Strategy hyperparameters (grid-searched values; see the estimator docs).
struct Hyperparams {
  double lwf_lambda = 0.9;
  bool lwf_previous_only = false;  // keep only the most recent snapshot
  double ewc_lambda = 0.75;
  double clear_lambda = 2.0;
  double clear_alpha = 0.5;
  int clear_buffer = 50;
  int clear_retrain_epochs = 10;
  double der_alpha = 200.0;
  double der_beta = 200.0;
  int der_buffer = 5;

  void validate() const {
    if (lwf_lambda < 0.0 || lwf_lambda > 1.0) throw ConfigError("lwf_lambda must be in [0,1]");
    if (ewc_lambda < 0.0) throw ConfigError("ewc_lambda must be >= 0");
    if (clear_lambda < 0.0) throw ConfigError("clear_lambda must be >= 0");
    if (clear_alpha < 0.0) throw ConfigError("clear_alpha must be >= 0");
    if (clear_buffer < 1) throw ConfigError("clear_buffer must be >= 1");
    if (clear_retrain_epochs < 0) throw ConfigError("clear_retrain_epochs must be >= 0");
    if (der_alpha < 0.0 || der_beta < 0.0) throw ConfigError("der weights must be >= 0");
    if (der_buffer < 0) throw ConfigError("der_buffer must be >= 0");
  }
};

inline void to_json(nlohmann::json& j, const Hyperparams& h) {
  j = nlohmann::json{{"lwf_lambda", h.lwf_lambda},
                     {"lwf_previous_only", h.lwf_previous_only},
                     {"ewc_lambda", h.ewc_lambda},
                     {"clear_lambda", h.clear_lambda},
                     {"clear_alpha", h.clear_alpha},
                     {"clear_buffer", h.clear_buffer},
                     {"clear_retrain_epochs", h.clear_retrain_epochs},
                     {"der_alpha", h.der_alpha},
                     {"der_beta", h.der_beta},
                     {"der_buffer", h.der_buffer}};
}

inline void from_json(const nlohmann::json& j, Hyperparams& h) {
  Hyperparams d;
  h.lwf_lambda = j.value("lwf_lambda", d.lwf_lambda);
  h.lwf_previous_only = j.value("lwf_previous_only", d.lwf_previous_only);
  h.ewc_lambda = j.value("ewc_lambda", d.ewc_lambda);
  h.clear_lambda = j.value("clear_lambda", d.clear_lambda);
  h.clear_alpha = j.value("clear_alpha", d.clear_alpha);
  h.clear_buffer = j.value("clear_buffer", d.clear_buffer);
  h.clear_retrain_epochs = j.value("clear_retrain_epochs", d.clear_retrain_epochs);
  h.der_alpha = j.value("der_alpha", d.der_alpha);
  h.der_beta = j.value("der_beta", d.der_beta);
  h.der_buffer = j.value("der_buffer", d.der_buffer);
  h.validate();
}

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {"baseline", "lwf", "ewc", "clear", "der"};
  return names;
}

inline std::unique_ptr<nn::LossStrategy> make_strategy(const std::string& name,
                                                       const Hyperparams& hp = {}) {
  hp.validate();
  if (name == "baseline") return std::make_unique<BaselineStrategy>();
  if (name == "lwf") return std::make_unique<LwfStrategy>(hp.lwf_lambda, hp.lwf_previous_only);
  if (name == "ewc") return std::make_unique<EwcStrategy>(hp.ewc_lambda);
  if (name == "clear")
    return std::make_unique<ClearStrategy>(hp.clear_lambda, hp.clear_alpha, hp.clear_buffer,
                                           hp.clear_retrain_epochs);
  if (name == "der") return std::make_unique<DerStrategy>(hp.der_alpha, hp.der_beta, hp.der_buffer);
  throw ConfigError("unknown strategy: " + name);
}

}  // namespace marq::cl

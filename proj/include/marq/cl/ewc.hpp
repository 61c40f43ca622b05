#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "marq/cl/detail.hpp"
#include "marq/cl/fisher.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl {

/// Elastic weight consolidation: quadratic penalties anchored at the
/// parameters learned in every previous task, weighted by the per-parameter
/// Fisher importance estimated at that task's end.
///
///   MSE(y, y_hat) + lambda/2 * sum_k sum_i F_i^k (theta_i - anchor_i^k)^2
class EwcStrategy : public nn::LossStrategy {
 public:
  struct Anchor {
    std::vector<double> theta;
    std::vector<double> fisher;
  };

  explicit EwcStrategy(double lambda) : lambda_(lambda) {}

  std::string name() const override { return "ewc"; }

  double loss(const nn::Model& m, nn::Batch batch) const override {
    double total = detail::batch_mse(m, batch);
    if (!anchors_.empty()) {
      const std::vector<double> theta = nn::flatten(m);
      for (const Anchor& a : anchors_)
        total += detail::quadratic_penalty(theta, a.theta, a.fisher, lambda_);
    }
    return total;
  }

  nn::Gradients gradient(const nn::Model& m, nn::Batch batch) const override {
    std::vector<nn::Features> xs;
    std::vector<double> ys;
    detail::split_batch(batch, xs, ys);
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, xs, ys, 1.0, g);
    if (!anchors_.empty()) {
      const std::vector<double> theta = nn::flatten(m);
      std::vector<double> flat = nn::flatten(g);
      for (const Anchor& a : anchors_)
        detail::add_quadratic_penalty_gradient(theta, a.theta, a.fisher, lambda_, flat);
      return detail::gradients_from_flat(flat);
    }
    return g;
  }

  void end_task(const nn::Model& m, const nn::Dataset& train_data) override {
    anchors_.push_back({nn::flatten(m), fisher_diagonal(m, train_data)});
  }

  const std::vector<Anchor>& anchors() const { return anchors_; }

  nlohmann::json state_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const Anchor& a : anchors_) arr.push_back({{"theta", a.theta}, {"fisher", a.fisher}});
    return {{"anchors", arr}};
  }

  void load_state(const nlohmann::json& j) override {
    anchors_.clear();
    for (const auto& a : j.value("anchors", nlohmann::json::array()))
      anchors_.push_back({a.at("theta").get<std::vector<double>>(),
                          a.at("fisher").get<std::vector<double>>()});
  }

 private:
  double lambda_;
  std::vector<Anchor> anchors_;
};

}  // namespace marq::cl

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "marq/cl/detail.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl {

/// Learning-without-forgetting, regression form: the distillation term keeps
/// the current model's outputs close to each frozen snapshot's outputs on the
/// current batch inputs (old task data is not accessible, so the current
/// inputs stand in for it).
///
///   (1 - lambda) * MSE(y, y_hat) + lambda/(K-1) * sum_k MSE(y, y(theta_old_k))
///
/// With no snapshots (first task) the distillation term is zero.
class LwfStrategy : public nn::LossStrategy {
 public:
  explicit LwfStrategy(double lambda, bool previous_only = false)
      : lambda_(lambda), previous_only_(previous_only) {}

  std::string name() const override { return "lwf"; }

  void prepare_batch(nn::Model& /*model*/, nn::Batch batch, bool /*first_pass*/, Rng& /*rng*/) override {
    teachers_.assign(snapshots_.size(), {});
    for (std::size_t k = 0; k < snapshots_.size(); ++k) {
      teachers_[k].reserve(batch.size());
      for (const nn::Sample& s : batch) teachers_[k].push_back(nn::predict(snapshots_[k], s.x));
    }
  }

  double loss(const nn::Model& m, nn::Batch batch) const override {
    double total = (1.0 - lambda_) * detail::batch_mse(m, batch);
    if (snapshots_.empty()) return total;
    std::vector<double> preds;
    preds.reserve(batch.size());
    for (const nn::Sample& s : batch) preds.push_back(nn::predict(m, s.x));
    const double w = lambda_ / static_cast<double>(snapshots_.size());
    for (std::size_t k = 0; k < snapshots_.size(); ++k)
      total += w * nn::mse_loss(preds, teachers_[k]);
    return total;
  }

  nn::Gradients gradient(const nn::Model& m, nn::Batch batch) const override {
    std::vector<nn::Features> xs;
    std::vector<double> ys;
    detail::split_batch(batch, xs, ys);
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, xs, ys, 1.0 - lambda_, g);
    if (!snapshots_.empty()) {
      const double w = lambda_ / static_cast<double>(snapshots_.size());
      for (std::size_t k = 0; k < snapshots_.size(); ++k)
        nn::accumulate_mse_gradient(m, xs, teachers_[k], w, g);
    }
    return g;
  }

  void end_task(const nn::Model& m, const nn::Dataset& /*train_data*/) override {
    if (previous_only_) snapshots_.clear();
    snapshots_.push_back(m);
  }

  std::size_t snapshot_count() const { return snapshots_.size(); }

  /// Snapshots are frozen copies; teacher targets for a batch are set up in
  /// prepare_batch so loss and gradient stay pure in the model argument.
  nlohmann::json state_json() const override {
    nlohmann::json snaps = nlohmann::json::array();
    for (const nn::Model& s : snapshots_) snaps.push_back(nn::flatten(s));
    return {{"snapshots", snaps}};
  }

  void load_state(const nlohmann::json& j) override {
    snapshots_.clear();
    for (const auto& flat : j.value("snapshots", nlohmann::json::array())) {
      nn::Model m;
      nn::unflatten(flat.get<std::vector<double>>(), m);
      snapshots_.push_back(std::move(m));
    }
  }

 private:
  double lambda_;
  bool previous_only_;
  std::vector<nn::Model> snapshots_;
  std::vector<std::vector<double>> teachers_;  // [snapshot][sample], per prepared batch
};

}  // namespace marq::cl

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/cl/detail.hpp"
#include "marq/cl/fisher.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl {

/// Continual learning for regression: an EWC-style penalty anchored at the
/// most recent task only, plus novelty/familiarity buffering. Each streamed
/// sample is scored with the composite loss; samples above threshold =
/// alpha * mse_min are buffered as novel, the rest as familiar (ties go to
/// familiar). When the buffers hold buffer_limit samples in total, training
/// pauses: the model retrains on the novelty buffer, is tested on the
/// familiarity buffer, mse_min/threshold drop to any lower familiarity loss,
/// and both buffers reset.
///
/// mse_min starts unset (threshold +inf, everything familiar) and is
/// initialized with the first validation MSE observed in the first task.
class ClearStrategy : public nn::LossStrategy {
 public:
  struct Anchor {
    std::vector<double> theta;
    std::vector<double> fisher;
  };

  ClearStrategy(double lambda, double alpha, int buffer_limit, int retrain_epochs = 10)
      : lambda_(lambda), alpha_(alpha), buffer_limit_(buffer_limit), retrain_epochs_(retrain_epochs) {}

  std::string name() const override { return "clear"; }

  void begin_task(int /*task_index*/, const nn::TrainConfig& cfg) override { cfg_ = cfg; }

  void prepare_batch(nn::Model& model, nn::Batch batch, bool first_pass, Rng& rng) override {
    if (!first_pass) return;
    for (const nn::Sample& s : batch) step_sample(model, s, rng);
  }

  double loss(const nn::Model& m, nn::Batch batch) const override {
    double total = detail::batch_mse(m, batch);
    if (anchor_) {
      const std::vector<double> theta = nn::flatten(m);
      total += detail::quadratic_penalty(theta, anchor_->theta, anchor_->fisher, lambda_);
    }
    return total;
  }

  nn::Gradients gradient(const nn::Model& m, nn::Batch batch) const override {
    std::vector<nn::Features> xs;
    std::vector<double> ys;
    detail::split_batch(batch, xs, ys);
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, xs, ys, 1.0, g);
    if (anchor_) {
      const std::vector<double> theta = nn::flatten(m);
      std::vector<double> flat = nn::flatten(g);
      detail::add_quadratic_penalty_gradient(theta, anchor_->theta, anchor_->fisher, lambda_, flat);
      return detail::gradients_from_flat(flat);
    }
    return g;
  }

  void observe_validation(double val_mse) override {
    if (!mse_min_) {
      mse_min_ = val_mse;
      threshold_ = alpha_ * val_mse;
    }
  }

  void end_task(const nn::Model& m, const nn::Dataset& train_data) override {
    anchor_ = Anchor{nn::flatten(m), fisher_diagonal(m, train_data)};
  }

  /// Scores one streamed sample and runs the buffer-full pause when due.
  void step_sample(nn::Model& model, const nn::Sample& s, Rng& rng) {
    const double sample_loss = per_sample_loss(model, s);
    if (sample_loss > threshold())
      novelty_.push_back(s);
    else
      familiarity_.push_back(s);
    if (static_cast<int>(novelty_.size() + familiarity_.size()) >= buffer_limit_)
      pause_and_retrain(model, rng);
  }

  double per_sample_loss(const nn::Model& m, const nn::Sample& s) const {
    const double d = nn::predict(m, s.x) - s.y;
    double total = d * d;
    if (anchor_) {
      const std::vector<double> theta = nn::flatten(m);
      total += detail::quadratic_penalty(theta, anchor_->theta, anchor_->fisher, lambda_);
    }
    return total;
  }

  double threshold() const { return mse_min_ ? threshold_ : std::numeric_limits<double>::infinity(); }
  std::optional<double> mse_min() const { return mse_min_; }
  int retrain_count() const { return retrains_; }
  std::size_t buffered_total() const { return novelty_.size() + familiarity_.size(); }
  std::size_t novelty_count() const { return novelty_.size(); }
  std::size_t familiarity_count() const { return familiarity_.size(); }

  nlohmann::json state_json() const override {
    nlohmann::json j{{"mse_min", mse_min_ ? nlohmann::json(*mse_min_) : nlohmann::json()},
                     {"threshold", threshold_},
                     {"novelty", samples_json(novelty_)},
                     {"familiarity", samples_json(familiarity_)}};
    if (anchor_) j["anchor"] = {{"theta", anchor_->theta}, {"fisher", anchor_->fisher}};
    return j;
  }

  void load_state(const nlohmann::json& j) override {
    anchor_.reset();
    if (j.contains("anchor") && !j.at("anchor").is_null())
      anchor_ = Anchor{j.at("anchor").at("theta").get<std::vector<double>>(),
                       j.at("anchor").at("fisher").get<std::vector<double>>()};
    mse_min_.reset();
    if (j.contains("mse_min") && !j.at("mse_min").is_null()) mse_min_ = j.at("mse_min").get<double>();
    threshold_ = j.value("threshold", 0.0);
    novelty_ = samples_from_json(j.value("novelty", nlohmann::json::array()));
    familiarity_ = samples_from_json(j.value("familiarity", nlohmann::json::array()));
  }

 private:
  void pause_and_retrain(nn::Model& model, Rng& rng) {
    if (!novelty_.empty()) {
      ++retrains_;  // an all-familiar buffer flush retrains nothing
      std::vector<std::size_t> idx(novelty_.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::vector<nn::Sample> buf;
      for (int epoch = 0; epoch < retrain_epochs_; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(cfg_.batch_size)) {
          const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(cfg_.batch_size));
          buf.clear();
          for (std::size_t i = start; i < end; ++i) buf.push_back(novelty_[idx[i]]);
          const nn::Gradients g = gradient(model, nn::Batch(buf));
          nn::apply_update(model, g, cfg_.learning_rate);
        }
      }
    }
    if (!familiarity_.empty() && mse_min_) {
      double lowest = std::numeric_limits<double>::infinity();
      for (const nn::Sample& s : familiarity_) {
        const double d = nn::predict(model, s.x) - s.y;
        lowest = std::min(lowest, d * d);
      }
      if (lowest < *mse_min_) {
        mse_min_ = lowest;
        threshold_ = alpha_ * lowest;
      }
    }
    novelty_.clear();
    familiarity_.clear();
  }

  static nlohmann::json samples_json(const std::vector<nn::Sample>& samples) {
    nlohmann::json arr = nlohmann::json::array();
    for (const nn::Sample& s : samples) arr.push_back({{"x", s.x}, {"y", s.y}});
    return arr;
  }

  static std::vector<nn::Sample> samples_from_json(const nlohmann::json& arr) {
    std::vector<nn::Sample> out;
    for (const auto& e : arr) {
      nn::Sample s;
      e.at("x").get_to(s.x);
      s.y = e.at("y").get<double>();
      out.push_back(s);
    }
    return out;
  }

  double lambda_;
  double alpha_;
  int buffer_limit_;
  int retrain_epochs_;
  nn::TrainConfig cfg_;
  std::optional<Anchor> anchor_;
  std::optional<double> mse_min_;
  double threshold_ = 0.0;
  std::vector<nn::Sample> novelty_;
  std::vector<nn::Sample> familiarity_;
  int retrains_ = 0;
};

}  // namespace marq::cl

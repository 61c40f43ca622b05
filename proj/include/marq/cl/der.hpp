#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/cl/detail.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl {

/// Dark experience replay, regression form. A reservoir-sampled buffer holds
/// (input, target, stored raw output) triples from the training stream; two
/// independently drawn subsets regularize the raw outputs toward the stored
/// values and the predictions toward the true targets:
///
///   MSE(y, y_hat) + alpha * MSE(z', raw(x')) + beta * MSE(y'', y(x''))
///
/// Both replay terms vanish while the buffer is empty, reducing to baseline.
class DerStrategy : public nn::LossStrategy {
 public:
  struct Entry {
    nn::Features x{};
    double y = 0.0;
    double z = 0.0;  // raw model output at storage time
  };

  DerStrategy(double alpha, double beta, int capacity)
      : alpha_(alpha), beta_(beta), capacity_(capacity) {}

  std::string name() const override { return "der"; }

  void prepare_batch(nn::Model& model, nn::Batch batch, bool first_pass, Rng& rng) override {
    // Replay subsets are drawn before insertion so replay is strictly past data.
    draw_replay(rng);
    if (first_pass) {
      for (const nn::Sample& s : batch) insert(s, nn::forward(model, s.x).raw, rng);
    }
  }

  double loss(const nn::Model& m, nn::Batch batch) const override {
    double total = detail::batch_mse(m, batch);
    total += replay_term(m, replay_a_, /*use_stored_raw=*/true, alpha_);
    total += replay_term(m, replay_b_, /*use_stored_raw=*/false, beta_);
    return total;
  }

  nn::Gradients gradient(const nn::Model& m, nn::Batch batch) const override {
    std::vector<nn::Features> xs;
    std::vector<double> ys;
    detail::split_batch(batch, xs, ys);
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, xs, ys, 1.0, g);
    add_replay_gradient(m, replay_a_, /*use_stored_raw=*/true, alpha_, g);
    add_replay_gradient(m, replay_b_, /*use_stored_raw=*/false, beta_, g);
    return g;
  }

  /// Reservoir insertion with capacity `capacity_`: the buffer stays a
  /// uniform sample of the stream seen so far.
  void insert(const nn::Sample& s, double raw, Rng& rng) {
    ++seen_;
    if (capacity_ <= 0) return;
    if (static_cast<int>(buffer_.size()) < capacity_) {
      buffer_.push_back({s.x, s.y, raw});
      return;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, seen_ - 1);
    const std::uint64_t j = pick(rng);
    if (j < static_cast<std::uint64_t>(capacity_)) buffer_[static_cast<std::size_t>(j)] = {s.x, s.y, raw};
  }

  const std::vector<Entry>& buffer() const { return buffer_; }
  std::uint64_t seen() const { return seen_; }

  /// Draws the two independent replay subsets used by loss/gradient.
  void draw_replay(Rng& rng) {
    draw_subset(replay_a_, rng);
    draw_subset(replay_b_, rng);
  }

  nlohmann::json state_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const Entry& e : buffer_) arr.push_back({{"x", e.x}, {"y", e.y}, {"z", e.z}});
    return {{"buffer", arr}, {"seen", seen_}};
  }

  void load_state(const nlohmann::json& j) override {
    buffer_.clear();
    for (const auto& e : j.value("buffer", nlohmann::json::array())) {
      Entry entry;
      e.at("x").get_to(entry.x);
      entry.y = e.at("y").get<double>();
      entry.z = e.at("z").get<double>();
      buffer_.push_back(entry);
    }
    seen_ = j.value("seen", std::uint64_t{0});
  }

 private:
  void draw_subset(std::vector<Entry>& out, Rng& rng) const {
    out.clear();
    if (buffer_.empty()) return;
    const auto want = static_cast<std::size_t>(capacity_);
    if (buffer_.size() <= want) {
      out = buffer_;
      return;
    }
    std::sample(buffer_.begin(), buffer_.end(), std::back_inserter(out), want, rng);
  }

  double replay_term(const nn::Model& m, const std::vector<Entry>& subset, bool use_stored_raw,
                     double weight) const {
    if (subset.empty() || weight == 0.0) return 0.0;
    double s = 0.0;
    for (const Entry& e : subset) {
      const nn::Forward f = nn::forward(m, e.x);
      const double d = use_stored_raw ? (e.z - f.raw) : (e.y - f.y);
      s += d * d;
    }
    return weight * s / static_cast<double>(subset.size());
  }

  void add_replay_gradient(const nn::Model& m, const std::vector<Entry>& subset,
                           bool use_stored_raw, double weight, nn::Gradients& g) const {
    if (subset.empty() || weight == 0.0) return;
    std::vector<nn::Features> xs;
    std::vector<double> targets;
    xs.reserve(subset.size());
    targets.reserve(subset.size());
    for (const Entry& e : subset) {
      xs.push_back(e.x);
      targets.push_back(use_stored_raw ? e.z : e.y);
    }
    nn::accumulate_mse_gradient(m, xs, targets, weight, g);
  }

  double alpha_;
  double beta_;
  int capacity_;
  std::vector<Entry> buffer_;
  std::uint64_t seen_ = 0;
  std::vector<Entry> replay_a_;
  std::vector<Entry> replay_b_;
};

}  // namespace marq::cl

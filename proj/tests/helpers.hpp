#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "marq/nn/model.hpp"
#include "marq/nn/train.hpp"

namespace marq::testutil {

inline nn::Model random_model(Rng& rng, double scale = 0.8) {
  nn::Model m;
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : m.w1) v = u(rng);
  for (auto& v : m.b1) v = u(rng);
  for (auto& v : m.w2) v = u(rng);
  m.b2 = u(rng);
  return m;
}

inline nn::Sample random_sample(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nn::Sample s;
  for (auto& v : s.x) v = u(rng);
  s.y = u(rng);
  return s;
}

inline std::vector<nn::Sample> random_batch(Rng& rng, std::size_t n) {
  std::vector<nn::Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_sample(rng));
  return out;
}

/// Central finite differences against the analytic gradient; returns the
/// worst relative error across all parameters. prepare_batch must already
/// have run for strategies that stage per-batch state.
///
/// The losses are differentiable only almost everywhere (ReLU); when the
/// +-h window straddles a kink the central difference is not a valid
/// derivative estimate, so parameters that look off are re-probed with a
/// 100x smaller step and the better of the two probes counts. A kink
/// artifact vanishes at the smaller step, float cancellation on near-zero
/// gradients vanishes at the larger one, and a genuine gradient bug fails
/// both.
inline double max_grad_rel_error(nn::LossStrategy& strategy, const nn::Model& model,
                                 nn::Batch batch, double h = 1e-5) {
  const std::vector<double> analytic = nn::flatten(strategy.gradient(model, batch));
  const std::vector<double> theta = nn::flatten(model);
  nn::Model probe = model;
  std::vector<double> bumped = theta;
  auto rel_error_at = [&](std::size_t i, double step) {
    bumped[i] = theta[i] + step;
    nn::unflatten(bumped, probe);
    const double lp = strategy.loss(probe, batch);
    bumped[i] = theta[i] - step;
    nn::unflatten(bumped, probe);
    const double lm = strategy.loss(probe, batch);
    bumped[i] = theta[i];
    const double fd = (lp - lm) / (2.0 * step);
    const double denom = std::max(std::abs(fd) + std::abs(analytic[i]), 1e-6);
    return std::abs(fd - analytic[i]) / denom;
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double rel = rel_error_at(i, h);
    if (rel > 1e-4) rel = std::min(rel, rel_error_at(i, 0.01 * h));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace marq::testutil

#pragma once

#include <span>
#include <vector>

#include "marq/nn/model.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl::detail {

inline void split_batch(nn::Batch batch, std::vector<nn::Features>& xs, std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  xs.reserve(batch.size());
  ys.reserve(batch.size());
  for (const nn::Sample& s : batch) {
    xs.push_back(s.x);
    ys.push_back(s.y);
  }
}

inline double batch_mse(const nn::Model& m, nn::Batch batch) {
  return nn::dataset_mse(m, batch);
}

/// (lambda/2) * sum_i F_i (theta_i - anchor_i)^2
inline double quadratic_penalty(std::span<const double> theta, std::span<const double> anchor,
                                std::span<const double> fisher, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = theta[i] - anchor[i];
    s += fisher[i] * d * d;
  }
  return 0.5 * lambda * s;
}

/// Adds lambda * F ⊙ (theta - anchor) to the flat gradient.
inline void add_quadratic_penalty_gradient(std::span<const double> theta,
                                           std::span<const double> anchor,
                                           std::span<const double> fisher, double lambda,
                                           std::vector<double>& grad_flat) {
  for (std::size_t i = 0; i < theta.size(); ++i)
    grad_flat[i] += lambda * fisher[i] * (theta[i] - anchor[i]);
}

inline nn::Gradients gradients_from_flat(std::span<const double> flat) {
  nn::Gradients g;
  std::size_t k = 0;
  for (auto& v : g.w1) v = flat[k++];
  for (auto& v : g.b1) v = flat[k++];
  for (auto& v : g.w2) v = flat[k++];
  g.b2 = flat[k];
  return g;
}

}  // namespace marq::cl::detail

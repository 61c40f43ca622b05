#pragma once

#include <vector>

#include "marq/nn/model.hpp"

namespace marq::cl {

/// Per-parameter importance: the population variance of the per-sample MSE
/// gradient d(f(x_j) - y_j)^2 / dtheta_i over the task's training data.
/// Single-sample or constant-gradient datasets yield all zeros.
inline std::vector<double> fisher_diagonal(const nn::Model& m, const nn::Dataset& data) {
  if (data.empty()) throw DataError("fisher_diagonal: empty dataset");
  const auto p = static_cast<std::size_t>(nn::Model::parameter_count());
  std::vector<double> mean(p, 0.0), m2(p, 0.0);
  std::size_t n = 0;
  for (const nn::Sample& s : data) {
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, std::span<const nn::Features>(&s.x, 1),
                                std::span<const double>(&s.y, 1), 1.0, g);
    const std::vector<double> flat = nn::flatten(g);
    ++n;
    for (std::size_t i = 0; i < p; ++i) {
      const double delta = flat[i] - mean[i];
      mean[i] += delta / static_cast<double>(n);
      m2[i] += delta * (flat[i] - mean[i]);
    }
  }
  std::vector<double> var(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) var[i] = m2[i] / static_cast<double>(n);
  return var;
}

}  // namespace marq::cl

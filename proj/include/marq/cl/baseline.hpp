#pragma once

#include <string>
#include <vector>

#include "marq/cl/detail.hpp"
#include "marq/nn/train.hpp"

namespace marq::cl {

/// Plain MSE on the current batch; no memory of previous tasks.
class BaselineStrategy : public nn::LossStrategy {
 public:
  std::string name() const override { return "baseline"; }

  double loss(const nn::Model& m, nn::Batch batch) const override {
    return detail::batch_mse(m, batch);
  }

  nn::Gradients gradient(const nn::Model& m, nn::Batch batch) const override {
    std::vector<nn::Features> xs;
    std::vector<double> ys;
    detail::split_batch(batch, xs, ys);
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, xs, ys, 1.0, g);
    return g;
  }
};

}  // namespace marq::cl

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "marq/common.hpp"

namespace marq::nn {

inline constexpr int kInputDim = 12;
inline constexpr int kHiddenDim = 20;

using Features = std::array<double, kInputDim>;

struct Sample {
  Features x{};
  double y = 0.0;
};

using Dataset = std::vector<Sample>;

/// Per-feature and output min-max ranges used for [0,1] normalization.
/// Computed once from the global parameter bounds, never per task, so the
/// input space stays fixed across the task stream.
struct NormBounds {
  std::array<double, kInputDim> lo{};
  std::array<double, kInputDim> hi = [] {
    std::array<double, kInputDim> a{};
    a.fill(1.0);
    return a;
  }();  // identity map by default
  double y_lo = 0.0;
  double y_hi = 1.0;

  double normalize_feature(int i, double v) const {
    const double t = (v - lo[static_cast<std::size_t>(i)]) /
                     (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
    return std::clamp(t, 0.0, 1.0);
  }

  double denormalize_feature(int i, double t) const {
    return lo[static_cast<std::size_t>(i)] +
           t * (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
  }

  double normalize_target(double v) const { return std::clamp((v - y_lo) / (y_hi - y_lo), 0.0, 1.0); }
  double denormalize_target(double t) const { return y_lo + t * (y_hi - y_lo); }

  Features normalize(const Features& raw) const {
    Features out;
    for (int i = 0; i < kInputDim; ++i) out[static_cast<std::size_t>(i)] = normalize_feature(i, raw[static_cast<std::size_t>(i)]);
    return out;
  }

  void validate() const {
    for (int i = 0; i < kInputDim; ++i)
      if (!(hi[static_cast<std::size_t>(i)] > lo[static_cast<std::size_t>(i)]))
        throw ConfigError("normalization range " + std::to_string(i) + " has max <= min");
    if (!(y_hi > y_lo)) throw ConfigError("output normalization range has max <= min");
  }
};

/// 12 -> 20 -> 1 feedforward regression network with ReLU hidden units.
/// For this network the raw pre-output value and the prediction coincide;
/// the raw value is what replay strategies store as the "logit".
struct Model {
  std::vector<double> w1 = std::vector<double>(kHiddenDim * kInputDim, 0.0);  // row-major [hidden][input]
  std::vector<double> b1 = std::vector<double>(kHiddenDim, 0.0);
  std::vector<double> w2 = std::vector<double>(kHiddenDim, 0.0);
  double b2 = 0.0;
  NormBounds norm;

  static constexpr int parameter_count() { return kHiddenDim * kInputDim + kHiddenDim + kHiddenDim + 1; }
};

struct Forward {
  double y = 0.0;                       // prediction (== raw for this head)
  double raw = 0.0;                     // pre-output value, exposed for replay
  std::array<double, kHiddenDim> hidden{};  // post-ReLU activations
};

inline Forward forward(const Model& m, const Features& x) {
  Forward f;
  for (int h = 0; h < kHiddenDim; ++h) {
    double z = m.b1[static_cast<std::size_t>(h)];
    const double* row = &m.w1[static_cast<std::size_t>(h) * kInputDim];
    for (int i = 0; i < kInputDim; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
    f.hidden[static_cast<std::size_t>(h)] = z > 0.0 ? z : 0.0;
  }
  double out = m.b2;
  for (int h = 0; h < kHiddenDim; ++h) out += m.w2[static_cast<std::size_t>(h)] * f.hidden[static_cast<std::size_t>(h)];
  f.raw = out;
  f.y = out;
  return f;
}

inline double predict(const Model& m, const Features& x) { return forward(m, x).y; }

/// Mean squared error between two equally sized vectors.
inline double mse_loss(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw DataError("mse_loss: length mismatch");
  if (pred.empty()) throw DataError("mse_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

/// Gradient container with the same shapes as Model.
struct Gradients {
  std::vector<double> w1 = std::vector<double>(kHiddenDim * kInputDim, 0.0);
  std::vector<double> b1 = std::vector<double>(kHiddenDim, 0.0);
  std::vector<double> w2 = std::vector<double>(kHiddenDim, 0.0);
  double b2 = 0.0;

  void add_scaled(const Gradients& g, double s) {
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += s * g.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += s * g.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += s * g.w2[i];
    b2 += s * g.b2;
  }
};

inline void apply_update(Model& m, const Gradients& g, double learning_rate) {
  for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= learning_rate * g.w1[i];
  for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= learning_rate * g.b1[i];
  for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= learning_rate * g.w2[i];
  m.b2 -= learning_rate * g.b2;
}

/// Flat parameter order: w1 row-major, b1, w2, b2.
inline std::vector<double> flatten(const Model& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(Model::parameter_count()));
  out.insert(out.end(), m.w1.begin(), m.w1.end());
  out.insert(out.end(), m.b1.begin(), m.b1.end());
  out.insert(out.end(), m.w2.begin(), m.w2.end());
  out.push_back(m.b2);
  return out;
}

inline std::vector<double> flatten(const Gradients& g) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(Model::parameter_count()));
  out.insert(out.end(), g.w1.begin(), g.w1.end());
  out.insert(out.end(), g.b1.begin(), g.b1.end());
  out.insert(out.end(), g.w2.begin(), g.w2.end());
  out.push_back(g.b2);
  return out;
}

inline void unflatten(std::span<const double> flat, Model& m) {
  if (flat.size() != static_cast<std::size_t>(Model::parameter_count()))
    throw DataError("unflatten: wrong parameter count");
  std::size_t k = 0;
  for (auto& v : m.w1) v = flat[k++];
  for (auto& v : m.b1) v = flat[k++];
  for (auto& v : m.w2) v = flat[k++];
  m.b2 = flat[k];
}

/// Accumulates scale * d/dtheta MSE(f(x_j), t_j) over the batch into g.
/// Targets are supplied separately so distillation and replay terms can reuse
/// the same path with teacher outputs or stored raw values as targets.
inline void accumulate_mse_gradient(const Model& m, std::span<const Features> xs,
                                    std::span<const double> targets, double scale, Gradients& g) {
  if (xs.size() != targets.size() || xs.empty()) throw DataError("accumulate_mse_gradient: bad batch");
  const double coeff = 2.0 * scale / static_cast<double>(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const Forward f = forward(m, xs[j]);
    const double dy = coeff * (f.y - targets[j]);
    g.b2 += dy;
    for (int h = 0; h < kHiddenDim; ++h) {
      const auto hh = static_cast<std::size_t>(h);
      g.w2[hh] += dy * f.hidden[hh];
      if (f.hidden[hh] > 0.0) {
        const double dh = dy * m.w2[hh];
        g.b1[hh] += dh;
        double* row = &g.w1[hh * kInputDim];
        for (int i = 0; i < kInputDim; ++i) row[i] += dh * xs[j][static_cast<std::size_t>(i)];
      }
    }
  }
}

/// MSE of model predictions against sample targets.
inline double dataset_mse(const Model& m, std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("dataset_mse: empty dataset");
  double s = 0.0;
  for (const Sample& smp : samples) {
    const double d = predict(m, smp.x) - smp.y;
    s += d * d;
  }
  return s / static_cast<double>(samples.size());
}

/// He-style uniform fan-in initialization, seeded for reproducibility.
inline Model init_model(std::uint64_t seed, const NormBounds& norm) {
  Model m;
  m.norm = norm;
  Rng rng(derive_seed(seed, "model-init"));
  const double limit1 = std::sqrt(6.0 / static_cast<double>(kInputDim));
  std::uniform_real_distribution<double> u1(-limit1, limit1);
  for (auto& v : m.w1) v = u1(rng);
  const double limit2 = std::sqrt(6.0 / static_cast<double>(kHiddenDim));
  std::uniform_real_distribution<double> u2(-limit2, limit2);
  for (auto& v : m.w2) v = u2(rng);
  // biases start at zero
  return m;
}

}  // namespace marq::nn

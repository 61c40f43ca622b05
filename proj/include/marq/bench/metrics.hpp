#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "marq/common.hpp"

namespace marq::bench {

/// Lower-triangular matrix of test errors: entry [K'][k] (1-based, k <= K') is
/// the test MSE on task k after the model finished training through task K'.
/// Rows are append-only: a scenario's row never changes once recorded.
struct EvalMatrix {
  std::vector<std::vector<double>> rows;

  std::size_t task_count() const { return rows.size(); }

  /// 1-based accessors matching the usual notation L_k^{K'}.
  double at(std::size_t scenario, std::size_t task) const {
    if (scenario < 1 || scenario > rows.size() || task < 1 || task > scenario)
      throw DataError("EvalMatrix: index out of range");
    return rows[scenario - 1][task - 1];
  }

  void append_row(std::vector<double> row) {
    if (row.size() != rows.size() + 1)
      throw DataError("EvalMatrix: row " + std::to_string(rows.size() + 1) + " must have " +
                      std::to_string(rows.size() + 1) + " entries");
    rows.push_back(std::move(row));
  }

  void validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != i + 1) throw DataError("EvalMatrix: not lower-triangular");
      for (double v : rows[i])
        if (v < 0.0) throw DataError("EvalMatrix: negative entry");
    }
  }
};

inline void to_json(nlohmann::json& j, const EvalMatrix& m) { j = m.rows; }

inline void from_json(const nlohmann::json& j, EvalMatrix& m) {
  m.rows = j.get<std::vector<std::vector<double>>>();
  m.validate();
}

/// Average of the diagonal entries: accuracy on each task right after
/// learning it.
inline double plasticity(const EvalMatrix& m) {
  if (m.rows.empty()) throw DataError("plasticity: empty matrix");
  double s = 0.0;
  for (std::size_t k = 1; k <= m.task_count(); ++k) s += m.at(k, k);
  return s / static_cast<double>(m.task_count());
}

/// Average of the last row: accuracy on every task after the full stream.
inline double stability(const EvalMatrix& m) {
  if (m.rows.empty()) throw DataError("stability: empty matrix");
  const std::size_t K = m.task_count();
  double s = 0.0;
  for (std::size_t k = 1; k <= K; ++k) s += m.at(K, k);
  return s / static_cast<double>(K);
}

/// Percentage increase from plasticity to stability.
inline double increase_rate(const EvalMatrix& m) {
  const double p = plasticity(m);
  if (p == 0.0) throw DataError("increase_rate: zero plasticity");
  return 100.0 * (stability(m) - p) / p;
}

/// Forgetting ratio over the first K tasks: the average relative error
/// increase of each task between when it was learned and the K-th scenario,
/// clamped at zero (backward transfer does not offset forgetting).
inline double forgetting_ratio(const EvalMatrix& m, std::size_t K) {
  if (K < 2 || K > m.task_count()) throw DataError("forgetting_ratio: K out of range");
  double s = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double learned = m.at(k, k);
    if (learned == 0.0) throw DataError("forgetting_ratio: zero diagonal entry");
    s += std::max(0.0, m.at(K, k) - learned) / learned;
  }
  return s / static_cast<double>(K);
}

/// F_r for every prefix K = 2..task_count, in order.
inline std::vector<double> forgetting_curve(const EvalMatrix& m) {
  std::vector<double> out;
  for (std::size_t K = 2; K <= m.task_count(); ++K) out.push_back(forgetting_ratio(m, K));
  return out;
}

/// The metrics bundle emitted next to every evaluation matrix.
inline nlohmann::json metrics_json(const EvalMatrix& m) {
  nlohmann::json j;
  j["matrix"] = m;
  j["plasticity"] = plasticity(m);
  j["stability"] = stability(m);
  j["increase_rate"] = increase_rate(m);
  j["forgetting_ratio_by_K"] = forgetting_curve(m);
  j["per_task_errors"] = m.rows.back();
  return j;
}

}  // namespace marq::bench

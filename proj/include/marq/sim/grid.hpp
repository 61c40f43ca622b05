#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "marq/sim/geometry.hpp"

namespace marq::sim {

/// Uniform hash grid over the environment cube. Cells are at least twice the
/// largest molecule diameter wide, so any overlapping pair lands in the same
/// or an adjacent cell and a 27-cell query returns a superset of all overlap
/// candidates.
class SpatialGrid {
 public:
  SpatialGrid() = default;

  SpatialGrid(double env_side, double cell_size) {
    cell_size_ = std::max(cell_size, 1e-9);
    half_ = 0.5 * env_side;
    // Cells may be wider than requested (they are never narrower), so the
    // 27-cell superset property is preserved while the dense cell array stays
    // bounded for very large environments.
    constexpr std::int64_t kMaxPerAxis = 128;
    per_axis_ = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(env_side / cell_size_)), 1, kMaxPerAxis);
    cell_size_ = env_side / static_cast<double>(per_axis_);
    cells_.assign(static_cast<std::size_t>(per_axis_ * per_axis_ * per_axis_), {});
  }

  void insert(std::int32_t id, const Vec3& p) { cells_[cell_index(p)].push_back(id); }

  void erase(std::int32_t id, const Vec3& p) {
    auto& cell = cells_[cell_index(p)];
    cell.erase(std::remove(cell.begin(), cell.end(), id), cell.end());
  }

  void move(std::int32_t id, const Vec3& from, const Vec3& to) {
    const std::size_t a = cell_index(from);
    const std::size_t b = cell_index(to);
    if (a == b) return;
    auto& cell = cells_[a];
    cell.erase(std::remove(cell.begin(), cell.end(), id), cell.end());
    cells_[b].push_back(id);
  }

  /// Visits every id stored in the 27 cells around p.
  template <typename Fn>
  void for_each_neighbor(const Vec3& p, Fn&& fn) const {
    const std::int64_t cx = axis_cell(p.x);
    const std::int64_t cy = axis_cell(p.y);
    const std::int64_t cz = axis_cell(p.z);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const std::int64_t x = cx + dx, y = cy + dy, z = cz + dz;
          if (x < 0 || y < 0 || z < 0 || x >= per_axis_ || y >= per_axis_ || z >= per_axis_) continue;
          for (std::int32_t id : cells_[static_cast<std::size_t>((x * per_axis_ + y) * per_axis_ + z)]) fn(id);
        }
  }

  double cell_size() const { return cell_size_; }

 private:
  std::int64_t axis_cell(double v) const {
    auto c = static_cast<std::int64_t>(std::floor((v + half_) / cell_size_));
    return std::clamp<std::int64_t>(c, 0, per_axis_ - 1);
  }

  std::size_t cell_index(const Vec3& p) const {
    return static_cast<std::size_t>((axis_cell(p.x) * per_axis_ + axis_cell(p.y)) * per_axis_ + axis_cell(p.z));
  }

  double cell_size_ = 1.0;
  double half_ = 0.0;
  std::int64_t per_axis_ = 1;
  std::vector<std::vector<std::int32_t>> cells_;
};

}  // namespace marq::sim

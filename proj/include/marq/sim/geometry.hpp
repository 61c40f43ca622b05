#pragma once

#include <algorithm>
#include <cmath>

namespace marq::sim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline double distance2(const Vec3& a, const Vec3& b) { return (a - b).norm2(); }
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(distance2(a, b)); }

/// Closest point on segment [a, b] to p.
inline Vec3 closest_point_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

inline double distance_to_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  return distance(p, closest_point_on_segment(a, b, p));
}

/// Axis-aligned cube centered at the origin with side length `side`.
struct EnvBox {
  double side = 0.0;

  double half() const { return 0.5 * side; }

  /// True when a sphere of radius r centered at p lies strictly inside the box.
  bool contains_sphere(const Vec3& p, double r) const {
    const double h = half() - r;
    return p.x > -h && p.x < h && p.y > -h && p.y < h && p.z > -h && p.z < h;
  }
};

}  // namespace marq::sim

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace marq {

/// Error raised by malformed configuration or parameter sets.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error raised by missing or malformed data artifacts (CSV, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling could not place all molecules within the retry budget.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ensemble whose delivery rate is below 0.5; its median would be censored.
class InvalidSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a component tag.
/// All randomness in the project flows from one user seed through this map.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(base, tag) ^ splitmix64(index));
}

/// Shortest round-trip decimal form of a double, for byte-stable CSV output.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Population variance (divides by N).
inline double variance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

inline double stddev(const std::vector<double>& xs) { return std::sqrt(variance(xs)); }

/// Linear-interpolation quantile (type 7) on a sorted copy of xs.
inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw DataError("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  if (xs.size() == 1) return xs[0];
  const double h = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

inline double median(const std::vector<double>& xs) { return quantile(xs, 0.5); }

}  // namespace marq

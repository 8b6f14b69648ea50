#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ddsim {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

/// Wrap an angle into [0, 2pi).
inline double wrap_to_2pi(double a) {
  double r = std::fmod(a, two_pi);
  if (r < 0) r += two_pi;
  return r;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_to_pm_pi(double a) {
  double r = std::fmod(a + pi, two_pi);
  if (r < 0) r += two_pi;
  return r - pi;
}

/// Unsigned distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
  return std::abs(wrap_to_pm_pi(a - b));
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
};

/// Ordinary least-squares line through (x_i, y_i).
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 equally sized samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

inline double mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 normalization).
inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// FNV-1a 64-bit hash, used for output-file checksums.
inline uint64_t fnv1a64(const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ddsim

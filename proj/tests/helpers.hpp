#pragma once

#include <cmath>
#include <random>

#include "occstereo/grid.hpp"

namespace testing {

using occstereo::Field;
using occstereo::Mask;

// Exact signed distance of a disk, positive inside.
inline Field disk_sdf(int w, int h, double cx, double cy, double r) {
  Field f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f(x, y) = r - std::hypot(x - cx, y - cy);
  }
  return f;
}

inline Field random_field(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(w, h);
  for (double& v : f.data()) v = u(rng);
  return f;
}

inline Field plane_x(int w, int h) {
  Field f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f(x, y) = x;
  }
  return f;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline std::size_t count_fg(const Field& phi) {
  std::size_t n = 0;
  for (double v : phi.data()) n += v >= 0.0;
  return n;
}

}  // namespace testing

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "occstereo/error.hpp"

namespace occstereo {

/// Dense row-major 2-D array, one sample per pixel.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(Errc::InvalidArgument, "grid dimensions must be >= 1");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  // Clamp-to-edge access.
  const T& clamped(int x, int y) const {
    return data_[index(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1))];
  }

  std::size_t index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::span<T> row(int y) { return std::span<T>(data_).subspan(index(0, y), width_); }
  std::span<const T> row(int y) const { return std::span<const T>(data_).subspan(index(0, y), width_); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;
using Mask = Grid<std::uint8_t>;

using LevelSetField = Field;
using DisparityMap = Field;
using OcclusionOffsets = Field;
using OcclusionMask = Mask;
using RegionMask = Mask;
using EvalBand = Mask;

/// Ground-truth hole marker. Any non-finite disparity is treated as a hole.
inline constexpr double kHoleDisparity = std::numeric_limits<double>::infinity();

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (!a.same_shape(b)) throw Error(Errc::InvalidArgument, std::string(what) + ": grid dimensions differ");
}

/// Linear interpolation along x on row y, coordinates clamped to the grid.
inline double sample_x(const Field& f, double x, int y) {
  const double xc = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
  const int x0 = static_cast<int>(std::floor(xc));
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const double t = xc - x0;
  return (1.0 - t) * f(x0, y) + t * f(x1, y);
}

inline std::size_t count_set(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(), [](auto v) { return v != 0; }));
}

}  // namespace occstereo

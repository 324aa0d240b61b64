#pragma once

// Cost volumes on the cyclopean grid: matching cost M(x,y,d) and the two
// boundary costs B_occ, B_mono.
//
// Geometry: a cyclopean sample (x, y, d) is seen by the left camera at column
// x + d and by the right camera at column x − d. With this convention a
// slope-1 ray in x–d space is a line of sight, and a disparity jump J leaves
// an occluded run of exactly J cyclopean pixels next to the boundary.

#include <span>
#include <vector>

#include "occstereo/grid.hpp"

namespace occstereo {

/// Per-unit-disparity column offset of each view from the cyclopean column.
inline constexpr double kViewShift = 1.0;

template <typename T>
class VolumeT {
 public:
  VolumeT() = default;
  VolumeT(int width, int height, int d_max, T fill = T{})
      : width_(width), height_(height), d_max_(d_max) {
    if (width < 1 || height < 1 || d_max < 0) throw Error(Errc::InvalidArgument, "bad volume dimensions");
    data_.assign(static_cast<std::size_t>(width) * height * (d_max + 1), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int d_max() const { return d_max_; }
  int depth() const { return d_max_ + 1; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int x, int y, int d) const {
    return (static_cast<std::size_t>(y) * width_ + x) * static_cast<std::size_t>(depth()) + d;
  }
  T& operator()(int x, int y, int d) { return data_[index(x, y, d)]; }
  const T& operator()(int x, int y, int d) const { return data_[index(x, y, d)]; }

  /// All disparities of one pixel, contiguous.
  std::span<T> curve(int x, int y) { return std::span<T>(data_).subspan(index(x, y, 0), depth()); }
  std::span<const T> curve(int x, int y) const {
    return std::span<const T>(data_).subspan(index(x, y, 0), depth());
  }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  template <typename U>
  bool same_shape(const VolumeT<U>& o) const {
    return width_ == o.width() && height_ == o.height() && d_max_ == o.d_max();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int d_max_ = 0;
  std::vector<T> data_;
};

using Volume = VolumeT<double>;
using BoundaryCostVolume = Volume;

/// Linear interpolation along d at integer (x, y); d clamped to [0, d_max].
double sample_d(const Volume& v, int x, int y, double d);

/// Bilinear in (x, d) on row y; both coordinates clamped to the volume.
double sample_xd(const Volume& v, double x, int y, double d);

struct StereoPair {
  Field left;   // intensities in [0, 1]
  Field right;
  int d_max = 1;
};

void validate(const StereoPair& pair);

struct CostVolume {
  Volume values;                      // |I_L(x + d) − I_R(x − d)|, in [0, 1]
  VolumeT<std::uint8_t> out_of_bounds;  // a projection fell outside its image
};

struct BoundaryParams {
  double eps_b = 1e-2;  // added to the edge response before inversion
  double b_cap = 100.0; // upper clamp of the inverted response
  double sigma_g = 1.5; // derivative-of-Gaussian scale for B_occ (px)
};

struct AlphaWeights {
  double alpha1 = 0.2;  // B_occ
  double alpha2 = 0.8;  // B_mono
  double alpha3 = 0.1;  // constant length penalty
};

CostVolume build_matching_cost(const StereoPair& pair);

/// x-derivative-of-Gaussian taps at scale sigma, normalized to unit L1 norm.
/// Convolving a unit step gives a peak response of 0.5.
std::vector<double> gaussian_derivative_kernel(double sigma);

/// 1 / (|G'_x ⊛ M| + eps_b), clamped to b_cap; the filter runs along x per
/// (y, d) slice with clamped borders.
BoundaryCostVolume build_occ_boundary_cost(const Volume& m, const BoundaryParams& params);

/// |g_x| + |g_y| of the 3×3 Sobel operator, clamped borders.
Field sobel_magnitude(const Field& image);

/// 1 / (|Sobel I_L|(x + d) + |Sobel I_R|(x − d) + eps_b), clamped to b_cap.
BoundaryCostVolume build_mono_boundary_cost(const StereoPair& pair, const BoundaryParams& params);

/// B = α1·B_occ(x,y,θ1) + α2·B_mono(x,y,θ1) + α3 with θ1(x,y) given per pixel
/// (linear interpolation along d, clamped to [0, d_max]).
Field combined_boundary_weight(const BoundaryCostVolume& b_occ, const BoundaryCostVolume& b_mono,
                               const Field& theta1_map, const AlphaWeights& w);

}  // namespace occstereo

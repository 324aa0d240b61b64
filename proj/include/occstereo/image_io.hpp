#pragma once

// Image, mask and PFM ingestion plus PNG rendering of solver outputs.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "occstereo/grid.hpp"
#include "occstereo/solver.hpp"

namespace occstereo {

namespace fs = std::filesystem;

/// 8/16-bit gray or RGB(A) PNG, or binary/ASCII PGM, as luminance in [0, 1]
/// (0.2126 R + 0.7152 G + 0.0722 B; alpha is dropped).
Field load_image(const fs::path& path);

/// Nonzero where the image is brighter than one half.
Mask load_mask(const fs::path& path);

/// Single-channel "Pf" files. Negative scale means little-endian; rows are
/// stored bottom-to-top. ±inf and NaN become kHoleDisparity.
DisparityMap load_pfm(const fs::path& path);

/// Writes little-endian "Pf" with scale −1. Non-finite values are written as +inf.
void save_pfm(const fs::path& path, const DisparityMap& d);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::array<std::uint8_t, 3> at(int x, int y) const;
  void set(int x, int y, std::array<std::uint8_t, 3> c);
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kOcclusionColor{0, 0, 139};
inline constexpr Rgb kHoleColor{255, 255, 255};
inline constexpr Rgb kContourColor{255, 32, 32};

/// Turbo-style colormap, t clamped to [0, 1].
Rgb turbo(double t);

void save_png(const fs::path& path, const RgbImage& img);

/// 16-bit grayscale PNG of values in [0, 1] (clamped).
void save_png_gray16(const fs::path& path, const Field& f);

/// 8-bit grayscale PNG, 255 where the mask is set.
void save_mask_png(const fs::path& path, const Mask& m);

/// Disparity through turbo over [0, d_max]; occluded pixels dark blue, holes white.
RgbImage render_disparity(const DisparityMap& d, const OcclusionMask& occ, double d_max);

/// Gray image with the φ zero crossing drawn on top.
RgbImage render_contour(const Field& image, const Field& phi);

/// Linear gray ramp of `f` over [lo, hi]; non-finite values render black.
RgbImage render_scalar(const Field& f, double lo, double hi);

struct VizToggles {
  bool images = true;
  bool trace = true;
};

/// disparity.png, contour.png, consensus_mean.png, consensus_precision.png and
/// trace.csv, each behind its toggle. Throws IoError.
void save_visualizations(const SolveResult& result, const Field& left, double d_max, const fs::path& dir,
                         const VizToggles& toggles);

}  // namespace occstereo

#pragma once

// Multi-scale overlapping patches, per-patch Gaussian disparity messages and
// the per-pixel product-of-Gaussians consensus.
//
// Level 0 holds single pixels. Level i > 0 holds squares of side
// base·2^(i−1) placed every side·stride_ratio pixels, so patches overlap
// densely; with the default ratio of ½ each patch is exactly tiled by patches
// of the level below and its cost curve is the sum of its children's curves
// (upward pass). The consensus is a downward pass: every pixel gathers the
// messages of all valid patches containing it.

#include <span>
#include <utility>
#include <vector>

#include "occstereo/consensus.hpp"
#include "occstereo/costs.hpp"
#include "occstereo/grid.hpp"

namespace occstereo {

struct HierarchyParams {
  int levels = 4;
  int base = 4;
  double stride_ratio = 0.5;
};

struct Patch {
  int x0 = 0;
  int y0 = 0;
  int side = 1;
  int level = 0;

  bool contains(int x, int y) const { return x >= x0 && x < x0 + side && y >= y0 && y < y0 + side; }
};

struct PatchLevel {
  int side = 1;
  int stride = 1;
  std::size_t first = 0;  // index of the level's first patch
  std::vector<int> xs;    // patch origins along x, ascending
  std::vector<int> ys;
  std::vector<std::pair<int, int>> col_cover;  // per column: [lo, hi) into xs of covering patches
  std::vector<std::pair<int, int>> row_cover;

  std::size_t count() const { return xs.size() * ys.size(); }
};

class PatchHierarchy {
 public:
  /// Throws GridTooSmall when the largest patch does not fit in the grid.
  static PatchHierarchy build(int width, int height, const HierarchyParams& params);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<PatchLevel>& levels() const { return levels_; }
  const std::vector<Patch>& patches() const { return patches_; }
  std::size_t size() const { return patches_.size(); }

  /// Patches of the level below that exactly tile patch `p`; empty for pixels
  /// and for border patches whose tiling is off the child lattice (those are
  /// summed directly from pixels).
  std::span<const int> children(std::size_t p) const {
    return std::span<const int>(child_index_).subspan(child_begin_[p], child_begin_[p + 1] - child_begin_[p]);
  }

  /// Calls fn(patch_index) for every patch containing pixel (x, y).
  template <typename Fn>
  void for_each_covering(int x, int y, Fn&& fn) const {
    for (const PatchLevel& lv : levels_) {
      const auto [cx0, cx1] = lv.col_cover[x];
      const auto [cy0, cy1] = lv.row_cover[y];
      const std::size_t nx = lv.xs.size();
      for (int iy = cy0; iy < cy1; ++iy) {
        for (int ix = cx0; ix < cx1; ++ix) fn(lv.first + static_cast<std::size_t>(iy) * nx + ix);
      }
    }
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<PatchLevel> levels_;
  std::vector<Patch> patches_;
  std::vector<std::size_t> child_begin_;
  std::vector<int> child_index_;
};

/// Cost curves C_p(d), d = 0..d_max, for every patch, stored contiguously.
class PatchCurves {
 public:
  PatchCurves() = default;
  PatchCurves(std::size_t n_patches, int d_max)
      : depth_(d_max + 1), values_(n_patches * static_cast<std::size_t>(d_max + 1), 0.0) {}

  int depth() const { return depth_; }
  int d_max() const { return depth_ - 1; }
  std::size_t count() const { return depth_ > 0 ? values_.size() / depth_ : 0; }
  std::span<double> curve(std::size_t p) { return std::span<double>(values_).subspan(p * depth_, depth_); }
  std::span<const double> curve(std::size_t p) const {
    return std::span<const double>(values_).subspan(p * depth_, depth_);
  }

 private:
  int depth_ = 0;
  std::vector<double> values_;
};

/// Upward pass: C_p(d) = Σ_{(x,y)∈p} M(x,y,d) + β|d − D(x,y)|. `disparity` may
/// be null, in which case the regularizer is dropped.
void aggregate_patch_costs(const PatchHierarchy& h, const Volume& m, const DisparityMap* disparity, double beta,
                           PatchCurves& curves);

struct PatchState {
  bool valid = true;
  double d = 0.0;
  double sigma = 0.0;  // +inf when the curve carries no information
};

inline constexpr double kFlatCurveThreshold = 1e-9;

struct Message {
  double d = 0.0;
  double sigma = 0.0;
};

/// d_p = argmin C_p (smallest d on ties); σ_p = d_max / (mean C_p − min C_p),
/// or +inf when the spread is below kFlatCurveThreshold.
Message update_message(std::span<const double> curve, int d_max);

/// Gaussian rendering of a message against its curve:
/// max C − (max C − min C)·exp(−(d − d_p)² / (2σ_p²)).
double message_curve(std::span<const double> curve, const Message& msg, double d);

/// w_p = [max_p φ > 0] XOR [min_p φ₊ < 0].
std::vector<std::uint8_t> update_validity(const PatchHierarchy& h, const Field& phi, const Field& phi_plus);

/// Recomputes d_p, σ_p for every patch and stores the validity flags.
void update_messages(const PatchHierarchy& h, const PatchCurves& curves, std::span<const std::uint8_t> validity,
                     std::vector<PatchState>& states);

/// Product of the Gaussians of all valid covering patches per pixel.
Consensus update_consensus(const PatchHierarchy& h, std::span<const PatchState> states);

}  // namespace occstereo

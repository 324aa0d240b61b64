#pragma once

// Synthetic two-layer scenes with exact ground truth, and the boundary
// evaluation protocol (occlusion F1 inside a horizontal band around the true
// boundary, bad-4.0 on the mutually visible part of that band).

#include <cstdint>
#include <string>

#include "occstereo/costs.hpp"
#include "occstereo/grid.hpp"
#include "occstereo/shapes.hpp"

namespace occstereo {

enum class TextureKind { Noise, Stripes, Checker };
enum class RegionKind { Ellipse, Rectangle };

std::string to_string(TextureKind k);
std::string to_string(RegionKind k);
TextureKind texture_kind_from_string(const std::string& s);
RegionKind region_kind_from_string(const std::string& s);

struct SceneSpec {
  int width = 256;
  int height = 256;
  int d_max = 32;
  RegionKind region = RegionKind::Ellipse;
  double cx = 128.0;  // region centre and half extents (px)
  double cy = 128.0;
  double rx = 60.0;
  double ry = 60.0;
  GlobalShape fg = GlobalShape::constant(20.0);  // same normalized basis as the solver
  GlobalShape bg = GlobalShape::constant(4.0);
  std::uint64_t seed = 1;
  TextureKind texture = TextureKind::Noise;
  double texture_scale = 1.0;  // px per noise lattice cell
  double noise_level = 0.0;    // std-dev of additive Gaussian image noise
  bool allow_degenerate = false;  // skip the fg > bg + 2 check
};

struct Scene {
  StereoPair pair;
  DisparityMap disparity;  // cyclopean ground truth
  OcclusionMask occlusion;
  Mask boundary;           // foreground pixels with a 4-neighbour in the background
  Mask region;             // foreground pixels
};

inline constexpr double kMinLayerSeparation = 2.0;

/// Throws IllPosed when the foreground is not at least 2 px in front of the
/// background everywhere inside the region.
Scene generate_scene(const SceneSpec& spec);

/// Nearer-side pixels of disparity jumps larger than `min_jump` to a
/// 4-neighbour. Used when no boundary mask accompanies a ground truth.
Mask boundary_from_disparity(const DisparityMap& d, double min_jump = kMinLayerSeparation);

/// Pixels within `radius` columns of a boundary pixel on the same row.
EvalBand boundary_band(const Mask& boundary, int radius);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double bad4 = 0.0;
  std::size_t band_pixels = 0;
  std::size_t visible_pixels = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  bool precision_undefined = false;  // no predicted occlusions in the band
  bool recall_undefined = false;     // no true occlusions in the band
};

/// Precision / recall / F1 of `pred` against `gt` counted on band pixels only.
MetricsReport occlusion_f1(const OcclusionMask& pred, const OcclusionMask& gt, const EvalBand& band);

struct Bad4 {
  double fraction = 0.0;
  std::size_t evaluated = 0;
};

inline constexpr double kBadThreshold = 4.0;

/// Fraction of band pixels that are visible in the ground truth and not holes
/// where |pred − gt| > 4.
Bad4 bad4(const DisparityMap& pred, const DisparityMap& gt, const EvalBand& band, const OcclusionMask& gt_occ);

inline constexpr int kEvalBandRadius = 20;

/// Full report: holes in `gt_disp` are dropped from the band before scoring.
MetricsReport evaluate(const DisparityMap& pred_disp, const OcclusionMask& pred_occ, const DisparityMap& gt_disp,
                       const OcclusionMask& gt_occ, const Mask& gt_boundary, int radius = kEvalBandRadius);

}  // namespace occstereo

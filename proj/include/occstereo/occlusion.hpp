#pragma once

// Occlusion geometry of a two-layer scene in x–d space.
//
// For each pixel a ray leaves (x, Θ1(x,y)) along a line of sight (slope ±1 in
// x–d space, the sign of dφ/dx) toward decreasing disparity. Where it first
// meets the background surface Θ2 at x*, the offset is Δθ = x − x*. A
// background pixel is occluded when φ(x + Δθ) lies in the foreground, so the
// occluded run next to a boundary has exactly the width of the disparity jump.

#include "occstereo/grid.hpp"
#include "occstereo/shapes.hpp"

namespace occstereo {

inline constexpr double kRayStep = 0.25;

/// Δθ per pixel from per-pixel evaluations of Θ1, Θ2 (already clamped to
/// [0, d_max]). Zero where dφ/dx = 0, where Θ1 <= Θ2, or where the ray leaves
/// the grid or reaches d < 0 without meeting Θ2.
OcclusionOffsets ray_cast_offsets(const Field& theta1_map, const Field& theta2_map, const Field& phi,
                                  double step = kRayStep);

OcclusionOffsets ray_cast_offsets(const GlobalShape& theta1, const GlobalShape& theta2, const Field& phi,
                                  const ShapeFrame& frame, double step = kRayStep);

/// φ₊(x,y) = φ(x + Δθ(x,y), y), linear along x with clamped coordinates.
Field shifted_levelset_sample(const Field& phi, const OcclusionOffsets& offsets);

/// Background pixels (φ < 0) whose shifted sample lands in the foreground (φ₊ >= 0).
OcclusionMask occluded_mask(const Field& phi, const Field& phi_plus);

/// Z-buffer visibility of a dense cyclopean disparity map: a pixel is occluded
/// when, in either view (columns x + d and x − d, rounded), some other pixel
/// with disparity greater by more than `margin` lands on the same column.
/// Non-finite disparities are holes: never occluded, never occluding.
OcclusionMask gt_occlusion_from_disparity(const DisparityMap& d_gt, double margin = 0.5);

}  // namespace occstereo

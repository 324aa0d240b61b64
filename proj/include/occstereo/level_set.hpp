#pragma once

// Level-set primitives on dense fields: smoothed step/impulse, curvature,
// normals, signed-distance reinitialization, median filtering and elliptical
// initialization. All functions are pure.

#include "occstereo/grid.hpp"

namespace occstereo {

inline constexpr double kGradientFloor = 1e-8;
inline constexpr double kDefaultHeavisideEps = 1.5;

/// ½(1 + (2/π)·atan(z/eps)).
double heaviside_eps(double z, double eps);

/// (1/π)·eps/(eps² + z²), the derivative of heaviside_eps.
double dirac_eps(double z, double eps);

struct Gradient {
  Field dx;
  Field dy;
};

/// Central differences with clamp-to-edge stencils (one-sided at borders).
Gradient central_gradient(const Field& f);

/// κ = div(∇φ/|∇φ|) by central differences; |∇φ|² is floored by `eta`.
/// Negative on the boundary of a convex foreground (φ > 0 inside).
Field curvature(const Field& phi, double eta = kGradientFloor);

struct NormalField {
  Field nx;
  Field ny;
};

/// ∇φ / sqrt(|∇φ|² + eta); magnitude never exceeds 1.
NormalField normal_field(const Field& phi, double eta = kGradientFloor);

/// Squared Euclidean distance from every pixel to the nearest pixel with
/// `targets != 0` (exact, separable two-pass transform). Pixels are +inf when
/// there is no target at all.
Field squared_distance_to(const Mask& targets);

struct ReinitResult {
  Field phi;
  bool all_one_sign = false;  // no zero crossing: `phi` is the unchanged input
};

/// Rebuilds φ as a signed distance function with the same sign pattern
/// (φ >= 0 is foreground). Pixels that have a 4-neighbour of opposite sign keep
/// their sub-pixel interface distance φ/|∇φ| (clamped to one pixel); every
/// other pixel gets the exact distance to the nearest opposite-sign pixel
/// minus half a pixel.
ReinitResult reinit_sdf(const Field& phi);

/// k×k median with clamped borders. `k` must be odd and >= 1.
Field median_filter(const Field& phi, int k);

struct EllipseSpec {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 1.0;
  double ry = 1.0;
};

/// 1 − ((x−cx)/rx)² − ((y−cy)/ry)², reinitialized to a signed distance.
/// Throws EllipseOutOfFrame when no pixel lies inside the ellipse or the
/// ellipse covers the whole frame.
Field init_ellipse(const EllipseSpec& spec, int width, int height);

/// Hard foreground test used throughout: φ = 0 counts as foreground.
inline bool is_foreground(double phi) { return phi >= 0.0; }

}  // namespace occstereo

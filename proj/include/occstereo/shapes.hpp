#pragma once

// Quadratic global disparity models over the basis (x², xy, y², x, y, 1).

#include <array>
#include <optional>

#include "occstereo/consensus.hpp"
#include "occstereo/grid.hpp"

namespace occstereo {

inline constexpr int kShapeTerms = 6;
inline constexpr double kShapeRidge = 1e-8;
inline constexpr double kMaxShapeCondition = 1e12;

struct GlobalShape {
  std::array<double, kShapeTerms> coeffs{};

  static GlobalShape constant(double d) {
    GlobalShape s;
    s.coeffs[5] = d;
    return s;
  }
  /// Polynomial value at normalized coordinates, no clamping.
  double raw(double xn, double yn) const;
  bool finite() const;

  friend bool operator==(const GlobalShape&, const GlobalShape&) = default;
};

std::array<double, kShapeTerms> shape_basis(double xn, double yn);

/// Maps pixel coordinates to [−1, 1]² and clamps evaluated disparities to
/// [0, d_max]. A one-pixel axis maps to 0.
struct ShapeFrame {
  int width = 1;
  int height = 1;
  double d_max = 0.0;

  double norm_x(double x) const { return width > 1 ? 2.0 * x / (width - 1) - 1.0 : 0.0; }
  double norm_y(double y) const { return height > 1 ? 2.0 * y / (height - 1) - 1.0 : 0.0; }

  double eval(const GlobalShape& s, double x, double y) const;
  Field evaluate(const GlobalShape& s) const;
};

/// Weighted least squares: minimizes Σ (Θ(x,y) − mean)² / (2σ²) over masked
/// pixels with finite σ. Returns nullopt (RankDeficient) with fewer than six
/// usable pixels or a normal matrix whose condition number exceeds 1e12.
std::optional<GlobalShape> fit_shape_wls(const Consensus& consensus, const RegionMask& mask, const ShapeFrame& frame,
                                         double ridge = kShapeRidge);

/// D = Θ1 where φ >= 0, Θ2 elsewhere.
DisparityMap compose_disparity(const Field& phi, const GlobalShape& theta1, const GlobalShape& theta2,
                               const ShapeFrame& frame);

}  // namespace occstereo

#include "occstereo/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "occstereo/costs.hpp"
#include "occstereo/level_set.hpp"

namespace occstereo {

namespace {

double march(const Field& theta1_map, const Field& theta2_map, const Field& phi, int x, int y, double step) {
  const double slope = phi.clamped(x + 1, y) - phi.clamped(x - 1, y);
  if (slope == 0.0) return 0.0;
  const double sgn = slope > 0.0 ? 1.0 : -1.0;
  const double d1 = theta1_map(x, y);
  double g_prev = d1 - theta2_map(x, y);
  if (g_prev <= 0.0) return 0.0;

  const double x_max = phi.width() - 1;
  double s_prev = 0.0;
  for (int i = 1;; ++i) {
    const double s = i * step;
    const double d = d1 - s;
    if (d < 0.0) return 0.0;
    const double xs = x - sgn * s;
    if (xs < 0.0 || xs > x_max) return 0.0;
    const double g = d - sample_x(theta2_map, xs, y);
    if (g <= 0.0) {
      const double s_star = s_prev + (s - s_prev) * g_prev / (g_prev - g);
      return sgn * s_star;
    }
    s_prev = s;
    g_prev = g;
  }
}

}  // namespace

OcclusionOffsets ray_cast_offsets(const Field& theta1_map, const Field& theta2_map, const Field& phi,
                                  double step) {
  require_same_shape(theta1_map, phi, "ray_cast_offsets");
  require_same_shape(theta2_map, phi, "ray_cast_offsets");
  if (!(step > 0.0)) throw Error(Errc::InvalidArgument, "ray step must be positive");
  OcclusionOffsets out(phi.width(), phi.height());
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) out(x, y) = march(theta1_map, theta2_map, phi, x, y, step);
  }
  return out;
}

OcclusionOffsets ray_cast_offsets(const GlobalShape& theta1, const GlobalShape& theta2, const Field& phi,
                                  const ShapeFrame& frame, double step) {
  return ray_cast_offsets(frame.evaluate(theta1), frame.evaluate(theta2), phi, step);
}

Field shifted_levelset_sample(const Field& phi, const OcclusionOffsets& offsets) {
  require_same_shape(phi, offsets, "shifted_levelset_sample");
  Field out(phi.width(), phi.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      const double o = offsets(x, y);
      out(x, y) = o == 0.0 ? phi(x, y) : sample_x(phi, x + o, y);
    }
  }
  return out;
}

OcclusionMask occluded_mask(const Field& phi, const Field& phi_plus) {
  require_same_shape(phi, phi_plus, "occluded_mask");
  OcclusionMask m(phi.width(), phi.height());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    m.data()[i] = !is_foreground(phi.data()[i]) && is_foreground(phi_plus.data()[i]);
  }
  return m;
}

OcclusionMask gt_occlusion_from_disparity(const DisparityMap& d_gt, double margin) {
  const int w = d_gt.width();
  const int h = d_gt.height();
  double d_hi = 0.0;
  for (double v : d_gt.data()) {
    if (std::isfinite(v)) d_hi = std::max(d_hi, std::abs(v));
  }
  const int pad = static_cast<int>(std::ceil(kViewShift * d_hi)) + 2;
  const int span = w + 2 * pad;
  constexpr double none = -std::numeric_limits<double>::infinity();

  OcclusionMask occ(w, h);
#pragma omp parallel
  {
    std::vector<double> best(static_cast<std::size_t>(span));
    std::vector<int> target(static_cast<std::size_t>(w));
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (const double side : {1.0, -1.0}) {
        std::fill(best.begin(), best.end(), none);
        for (int x = 0; x < w; ++x) {
          const double d = d_gt(x, y);
          if (!std::isfinite(d)) continue;
          target[x] = static_cast<int>(std::lround(x + side * kViewShift * d)) + pad;
          best[target[x]] = std::max(best[target[x]], d);
        }
        for (int x = 0; x < w; ++x) {
          const double d = d_gt(x, y);
          if (std::isfinite(d) && best[target[x]] > d + margin) occ(x, y) = 1;
        }
      }
    }
  }
  return occ;
}

}  // namespace occstereo

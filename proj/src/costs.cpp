#include "occstereo/costs.hpp"

#include <algorithm>
#include <cmath>

namespace occstereo {

double sample_d(const Volume& v, int x, int y, double d) {
  const double dc = std::clamp(d, 0.0, static_cast<double>(v.d_max()));
  const int d0 = static_cast<int>(std::floor(dc));
  const int d1 = std::min(d0 + 1, v.d_max());
  const double t = dc - d0;
  return (1.0 - t) * v(x, y, d0) + t * v(x, y, d1);
}

double sample_xd(const Volume& v, double x, int y, double d) {
  const double xc = std::clamp(x, 0.0, static_cast<double>(v.width() - 1));
  const int x0 = static_cast<int>(std::floor(xc));
  const int x1 = std::min(x0 + 1, v.width() - 1);
  const double t = xc - x0;
  return (1.0 - t) * sample_d(v, x0, y, d) + t * sample_d(v, x1, y, d);
}

void validate(const StereoPair& pair) {
  if (pair.left.empty() || !pair.left.same_shape(pair.right)) {
    throw Error(Errc::InvalidArgument, "left and right images must be non-empty and the same size");
  }
  if (pair.d_max < 1) throw Error(Errc::InvalidArgument, "d_max must be >= 1");
}

namespace {

// Clamped sample at a column that may be fractional.
double sample_row(const Field& img, double x, int y, bool& outside) {
  outside = x < 0.0 || x > img.width() - 1;
  return sample_x(img, x, y);
}

}  // namespace

CostVolume build_matching_cost(const StereoPair& pair) {
  validate(pair);
  const int w = pair.left.width();
  const int h = pair.left.height();
  CostVolume cv{Volume(w, h, pair.d_max), VolumeT<std::uint8_t>(w, h, pair.d_max)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d <= pair.d_max; ++d) {
        bool out_l = false, out_r = false;
        const double il = sample_row(pair.left, x + kViewShift * d, y, out_l);
        const double ir = sample_row(pair.right, x - kViewShift * d, y, out_r);
        cv.values(x, y, d) = std::min(1.0, std::abs(il - ir));
        cv.out_of_bounds(x, y, d) = out_l || out_r;
      }
    }
  }
  return cv;
}

std::vector<double> gaussian_derivative_kernel(double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma_g must be positive");
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double l1 = 0.0;
  for (int t = -r; t <= r; ++t) {
    // Correlation taps: response(x) = Σ k[t] M(x + t), positive for rising steps.
    const double v = t * std::exp(-0.5 * t * t / (sigma * sigma));
    k[t + r] = v;
    l1 += std::abs(v);
  }
  for (double& v : k) v /= l1;
  return k;
}

BoundaryCostVolume build_occ_boundary_cost(const Volume& m, const BoundaryParams& params) {
  const std::vector<double> k = gaussian_derivative_kernel(params.sigma_g);
  const int r = static_cast<int>(k.size() / 2);
  const int w = m.width();
  const int h = m.height();
  const int nd = m.depth();
  BoundaryCostVolume b(w, h, m.d_max());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d < nd; ++d) {
        // Taps are odd, so pair them: a flat neighbourhood gives exactly zero.
        double acc = 0.0;
        for (int t = 1; t <= r; ++t) {
          acc += k[t + r] * (m(std::min(x + t, w - 1), y, d) - m(std::max(x - t, 0), y, d));
        }
        b(x, y, d) = std::min(params.b_cap, 1.0 / (std::abs(acc) + params.eps_b));
      }
    }
  }
  return b;
}

Field sobel_magnitude(const Field& img) {
  const int w = img.width();
  const int h = img.height();
  Field out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto p = [&](int dx, int dy) { return img.clamped(x + dx, y + dy); };
      const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      out(x, y) = std::abs(gx) + std::abs(gy);
    }
  }
  return out;
}

BoundaryCostVolume build_mono_boundary_cost(const StereoPair& pair, const BoundaryParams& params) {
  validate(pair);
  const Field sl = sobel_magnitude(pair.left);
  const Field sr = sobel_magnitude(pair.right);
  const int w = sl.width();
  const int h = sl.height();
  BoundaryCostVolume b(w, h, pair.d_max);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d <= pair.d_max; ++d) {
        const double e = sample_x(sl, x + kViewShift * d, y) + sample_x(sr, x - kViewShift * d, y);
        b(x, y, d) = std::min(params.b_cap, 1.0 / (e + params.eps_b));
      }
    }
  }
  return b;
}

Field combined_boundary_weight(const BoundaryCostVolume& b_occ, const BoundaryCostVolume& b_mono,
                               const Field& theta1_map, const AlphaWeights& w) {
  if (!b_occ.same_shape(b_mono) || b_occ.width() != theta1_map.width() ||
      b_occ.height() != theta1_map.height()) {
    throw Error(Errc::InvalidArgument, "boundary volumes and shape map disagree in size");
  }
  Field out(theta1_map.width(), theta1_map.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double d = theta1_map(x, y);
      out(x, y) = w.alpha1 * sample_d(b_occ, x, y, d) + w.alpha2 * sample_d(b_mono, x, y, d) + w.alpha3;
    }
  }
  return out;
}

}  // namespace occstereo

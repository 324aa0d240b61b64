#include "occstereo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "occstereo/occlusion.hpp"

namespace occstereo {

std::string to_string(TextureKind k) {
  switch (k) {
    case TextureKind::Noise: return "noise";
    case TextureKind::Stripes: return "stripes";
    case TextureKind::Checker: return "checker";
  }
  return "noise";
}

std::string to_string(RegionKind k) { return k == RegionKind::Ellipse ? "ellipse" : "rectangle"; }

TextureKind texture_kind_from_string(const std::string& s) {
  if (s == "noise") return TextureKind::Noise;
  if (s == "stripes") return TextureKind::Stripes;
  if (s == "checker") return TextureKind::Checker;
  throw Error(Errc::InvalidArgument, "unknown texture kind '" + s + "'");
}

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "ellipse") return RegionKind::Ellipse;
  if (s == "rectangle") return RegionKind::Rectangle;
  throw Error(Errc::InvalidArgument, "unknown region kind '" + s + "'");
}

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform [0, 1) value attached to an integer lattice point of one layer.
double lattice(std::uint64_t seed, int layer, long i, long j) {
  std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(layer) + 0x51ed27ULL));
  h = mix(h ^ static_cast<std::uint64_t>(i));
  h = mix(h ^ static_cast<std::uint64_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, int layer, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const long i = static_cast<long>(fu);
  const long j = static_cast<long>(fv);
  const double a = u - fu;
  const double b = v - fv;
  const double n00 = lattice(seed, layer, i, j);
  const double n10 = lattice(seed, layer, i + 1, j);
  const double n01 = lattice(seed, layer, i, j + 1);
  const double n11 = lattice(seed, layer, i + 1, j + 1);
  return (1 - b) * ((1 - a) * n00 + a * n10) + b * ((1 - a) * n01 + a * n11);
}

// Surface texture, a function of the cyclopean coordinates of the surface point.
double texture(const SceneSpec& s, int layer, double u, double v) {
  switch (s.texture) {
    case TextureKind::Noise:
      return value_noise(s.seed, layer, u / s.texture_scale, v / s.texture_scale);
    case TextureKind::Stripes: {
      const double period = layer == 0 ? 6.0 : 9.0;
      const double phase = 2.0 * std::numbers::pi * lattice(s.seed, layer, -1, -1);
      return 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * u / period + phase) +
             0.1 * (value_noise(s.seed, layer, u / s.texture_scale, v / s.texture_scale) - 0.5);
    }
    case TextureKind::Checker: {
      const long cu = static_cast<long>(std::floor(u / 8.0));
      const long cv = static_cast<long>(std::floor(v / 8.0));
      const double base = ((cu + cv) % 2 == 0) == (layer == 0) ? 0.75 : 0.25;
      return base + 0.2 * (value_noise(s.seed, layer, u / s.texture_scale, v / s.texture_scale) - 0.5);
    }
  }
  return 0.0;
}

bool in_region(const SceneSpec& s, double x, double y) {
  const double u = (x - s.cx) / s.rx;
  const double v = (y - s.cy) / s.ry;
  if (s.region == RegionKind::Ellipse) return u * u + v * v <= 1.0;
  return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
}

// Cyclopean column x of the layer point seen at image column u (x + side·d(x) = u).
double back_project(const ShapeFrame& frame, const GlobalShape& layer, double u, int y, double side) {
  double x = u;
  for (int it = 0; it < 64; ++it) {
    const double next = u - side * kViewShift * frame.eval(layer, x, y);
    if (std::abs(next - x) < 1e-12) return next;
    x = next;
  }
  return x;
}

}  // namespace

Scene generate_scene(const SceneSpec& s) {
  if (s.width < 2 || s.height < 2 || s.d_max < 1) throw Error(Errc::InvalidArgument, "bad scene dimensions");
  if (!(s.rx > 0.0) || !(s.ry > 0.0)) throw Error(Errc::InvalidArgument, "region extents must be positive");
  if (!(s.texture_scale > 0.0)) throw Error(Errc::InvalidArgument, "texture_scale must be positive");
  const ShapeFrame frame{s.width, s.height, static_cast<double>(s.d_max)};

  Scene sc;
  sc.region = Mask(s.width, s.height);
  sc.disparity = DisparityMap(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const bool fg = in_region(s, x, y);
      sc.region(x, y) = fg;
      const double dfg = frame.eval(s.fg, x, y);
      const double dbg = frame.eval(s.bg, x, y);
      if (fg && !s.allow_degenerate && dfg < dbg + kMinLayerSeparation) {
        throw Error(Errc::IllPosed, "foreground must be at least 2 px nearer than the background at (" +
                                        std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      sc.disparity(x, y) = fg ? dfg : dbg;
    }
  }

  sc.boundary = Mask(s.width, s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (!sc.region(x, y)) continue;
      for (auto [ox, oy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int nx = x + ox;
        const int ny = y + oy;
        if (nx >= 0 && ny >= 0 && nx < s.width && ny < s.height && !sc.region(nx, ny)) sc.boundary(x, y) = 1;
      }
    }
  }

  // Each image pixel shows the nearer layer point projecting onto it; the
  // foreground is always in front inside its region.
  sc.pair.d_max = s.d_max;
  sc.pair.left = Field(s.width, s.height);
  sc.pair.right = Field(s.width, s.height);
  for (const double side : {1.0, -1.0}) {
    Field& img = side > 0 ? sc.pair.left : sc.pair.right;
    for (int y = 0; y < s.height; ++y) {
      for (int u = 0; u < s.width; ++u) {
        const double xf = back_project(frame, s.fg, u, y, side);
        if (in_region(s, xf, y)) {
          img(u, y) = texture(s, 0, xf, y);
        } else {
          img(u, y) = texture(s, 1, back_project(frame, s.bg, u, y, side), y);
        }
      }
    }
  }
  if (s.noise_level > 0.0) {
    std::mt19937_64 rng(mix(s.seed ^ 0xa5a5a5a5ULL));
    std::normal_distribution<double> noise(0.0, s.noise_level);
    for (Field* img : {&sc.pair.left, &sc.pair.right}) {
      for (double& v : img->data()) v += noise(rng);
    }
  }
  for (Field* img : {&sc.pair.left, &sc.pair.right}) {
    for (double& v : img->data()) v = std::clamp(v, 0.0, 1.0);
  }

  sc.occlusion = gt_occlusion_from_disparity(sc.disparity);
  return sc;
}

Mask boundary_from_disparity(const DisparityMap& d, double min_jump) {
  Mask b(d.width(), d.height());
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      const double v = d(x, y);
      if (!std::isfinite(v)) continue;
      for (auto [ox, oy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int nx = x + ox;
        const int ny = y + oy;
        if (nx < 0 || ny < 0 || nx >= d.width() || ny >= d.height()) continue;
        const double u = d(nx, ny);
        if (std::isfinite(u) && v > u + min_jump) b(x, y) = 1;
      }
    }
  }
  return b;
}

EvalBand boundary_band(const Mask& boundary, int radius) {
  if (radius < 0) throw Error(Errc::InvalidArgument, "band radius must be >= 0");
  const int w = boundary.width();
  EvalBand band(w, boundary.height());
  for (int y = 0; y < boundary.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      if (!boundary(x, y)) continue;
      for (int u = std::max(0, x - radius); u <= std::min(w - 1, x + radius); ++u) band(u, y) = 1;
    }
  }
  return band;
}

MetricsReport occlusion_f1(const OcclusionMask& pred, const OcclusionMask& gt, const EvalBand& band) {
  require_same_shape(pred, gt, "occlusion_f1");
  require_same_shape(pred, band, "occlusion_f1");
  MetricsReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!band.data()[i]) continue;
    ++r.band_pixels;
    const bool p = pred.data()[i] != 0;
    const bool g = gt.data()[i] != 0;
    r.true_positives += p && g;
    r.false_positives += p && !g;
    r.false_negatives += !p && g;
  }
  const std::size_t pred_pos = r.true_positives + r.false_positives;
  const std::size_t gt_pos = r.true_positives + r.false_negatives;
  r.precision_undefined = pred_pos == 0;
  r.recall_undefined = gt_pos == 0;
  r.precision = pred_pos ? static_cast<double>(r.true_positives) / pred_pos : 0.0;
  r.recall = gt_pos ? static_cast<double>(r.true_positives) / gt_pos : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

Bad4 bad4(const DisparityMap& pred, const DisparityMap& gt, const EvalBand& band, const OcclusionMask& gt_occ) {
  require_same_shape(pred, gt, "bad4");
  require_same_shape(pred, band, "bad4");
  require_same_shape(pred, gt_occ, "bad4");
  Bad4 b;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double g = gt.data()[i];
    if (!band.data()[i] || gt_occ.data()[i] || !std::isfinite(g)) continue;
    ++b.evaluated;
    bad += std::abs(pred.data()[i] - g) > kBadThreshold;
  }
  b.fraction = b.evaluated ? static_cast<double>(bad) / b.evaluated : 0.0;
  return b;
}

MetricsReport evaluate(const DisparityMap& pred_disp, const OcclusionMask& pred_occ, const DisparityMap& gt_disp,
                       const OcclusionMask& gt_occ, const Mask& gt_boundary, int radius) {
  EvalBand band = boundary_band(gt_boundary, radius);
  require_same_shape(band, gt_disp, "evaluate");
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (!std::isfinite(gt_disp.data()[i])) band.data()[i] = 0;
  }
  MetricsReport r = occlusion_f1(pred_occ, gt_occ, band);
  const Bad4 b = bad4(pred_disp, gt_disp, band, gt_occ);
  r.bad4 = b.fraction;
  r.visible_pixels = b.evaluated;
  return r;
}

}  // namespace occstereo

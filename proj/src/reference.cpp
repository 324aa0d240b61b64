#include "occstereo/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occstereo::reference {

namespace {

double lerp_row(const Field& img, double x, int y) {
  const double xc = std::min(std::max(x, 0.0), img.width() - 1.0);
  const int x0 = static_cast<int>(xc);
  const int x1 = x0 + 1 < img.width() ? x0 + 1 : x0;
  return img(x0, y) + (xc - x0) * (img(x1, y) - img(x0, y));
}

double at(const Field& f, int x, int y) {
  x = std::min(std::max(x, 0), f.width() - 1);
  y = std::min(std::max(y, 0), f.height() - 1);
  return f(x, y);
}

}  // namespace

Volume matching_cost(const StereoPair& pair) {
  Volume v(pair.left.width(), pair.left.height(), pair.d_max);
  for (int y = 0; y < v.height(); ++y) {
    for (int x = 0; x < v.width(); ++x) {
      for (int d = 0; d <= v.d_max(); ++d) {
        const double diff = lerp_row(pair.left, x + kViewShift * d, y) - lerp_row(pair.right, x - kViewShift * d, y);
        v(x, y, d) = std::min(1.0, std::abs(diff));
      }
    }
  }
  return v;
}

Field median_filter(const Field& phi, int k) {
  if (k < 1 || k % 2 == 0) throw Error(Errc::InvalidArgument, "median window must be odd and >= 1");
  const int r = k / 2;
  Field out(phi.width(), phi.height());
  std::vector<double> win;
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      win.clear();
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) win.push_back(at(phi, x + dx, y + dy));
      }
      std::sort(win.begin(), win.end());
      out(x, y) = win[win.size() / 2];
    }
  }
  return out;
}

Field squared_distance_to(const Mask& targets) {
  Field out(targets.width(), targets.height(), std::numeric_limits<double>::infinity());
  for (int y = 0; y < targets.height(); ++y) {
    for (int x = 0; x < targets.width(); ++x) {
      for (int v = 0; v < targets.height(); ++v) {
        for (int u = 0; u < targets.width(); ++u) {
          if (!targets(u, v)) continue;
          const double d2 = double(u - x) * (u - x) + double(v - y) * (v - y);
          out(x, y) = std::min(out(x, y), d2);
        }
      }
    }
  }
  return out;
}

OcclusionOffsets ray_cast_offsets(const Field& theta1_map, const Field& theta2_map, const Field& phi, double step) {
  OcclusionOffsets out(phi.width(), phi.height());
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      const double slope = at(phi, x + 1, y) - at(phi, x - 1, y);
      const double d1 = theta1_map(x, y);
      if (slope == 0.0 || d1 <= theta2_map(x, y)) continue;
      const double sgn = slope > 0.0 ? 1.0 : -1.0;
      double prev_gap = d1 - theta2_map(x, y);
      for (int i = 1; d1 - i * step >= 0.0; ++i) {
        const double xs = x - sgn * i * step;
        if (xs < 0.0 || xs > phi.width() - 1) break;
        const double gap = d1 - i * step - lerp_row(theta2_map, xs, y);
        if (gap <= 0.0) {
          out(x, y) = sgn * ((i - 1) * step + step * prev_gap / (prev_gap - gap));
          break;
        }
        prev_gap = gap;
      }
    }
  }
  return out;
}

PatchCurves aggregate_patch_costs(const PatchHierarchy& h, const Volume& m, const DisparityMap* disparity,
                                  double beta) {
  PatchCurves curves(h.size(), m.d_max());
  for (std::size_t p = 0; p < h.size(); ++p) {
    const Patch& pa = h.patches()[p];
    auto c = curves.curve(p);
    for (int y = pa.y0; y < pa.y0 + pa.side; ++y) {
      for (int x = pa.x0; x < pa.x0 + pa.side; ++x) {
        for (int d = 0; d <= m.d_max(); ++d) {
          c[d] += m(x, y, d) + (disparity && beta != 0.0 ? beta * std::abs(d - (*disparity)(x, y)) : 0.0);
        }
      }
    }
  }
  return curves;
}

Consensus update_consensus(const PatchHierarchy& h, const std::vector<PatchState>& states) {
  Consensus c{Field(h.width(), h.height(), std::numeric_limits<double>::quiet_NaN()),
              Field(h.width(), h.height(), std::numeric_limits<double>::infinity())};
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      double prec = 0.0, num = 0.0;
      for (std::size_t p = 0; p < h.size(); ++p) {
        if (!h.patches()[p].contains(x, y) || !states[p].valid || !std::isfinite(states[p].sigma)) continue;
        prec += 1.0 / (states[p].sigma * states[p].sigma);
        num += states[p].d / (states[p].sigma * states[p].sigma);
      }
      if (prec > 0.0) {
        c.mean(x, y) = num / prec;
        c.sigma(x, y) = std::sqrt(1.0 / prec);
      }
    }
  }
  return c;
}

Field evolution_bracket(const Field& phi, const DataTerms& data, const Field& b_weight, double mu) {
  constexpr double eta = 1e-8;
  Field out(phi.width(), phi.height());
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      double geo = 0.0;
      if (mu != 0.0) {
        const double px = 0.5 * (at(phi, x + 1, y) - at(phi, x - 1, y));
        const double py = 0.5 * (at(phi, x, y + 1) - at(phi, x, y - 1));
        const double pxx = at(phi, x + 1, y) - 2 * phi(x, y) + at(phi, x - 1, y);
        const double pyy = at(phi, x, y + 1) - 2 * phi(x, y) + at(phi, x, y - 1);
        const double pxy = 0.25 * (at(phi, x + 1, y + 1) - at(phi, x + 1, y - 1) - at(phi, x - 1, y + 1) +
                                   at(phi, x - 1, y - 1));
        const double g2 = px * px + py * py + eta;
        const double kappa = (pxx * py * py - 2 * px * py * pxy + pyy * px * px) / std::pow(g2, 1.5);
        const double bx = 0.5 * (at(b_weight, x + 1, y) - at(b_weight, x - 1, y));
        const double by = 0.5 * (at(b_weight, x, y + 1) - at(b_weight, x, y - 1));
        geo = b_weight(x, y) * kappa + (px * bx + py * by) / std::sqrt(g2);
      }
      out(x, y) = -data.m1(x, y) + data.m2_shifted(x, y) + mu * geo;
    }
  }
  return out;
}

}  // namespace occstereo::reference

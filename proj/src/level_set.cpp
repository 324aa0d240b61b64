#include "occstereo/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace occstereo {

double heaviside_eps(double z, double eps) {
  return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(z / eps));
}

double dirac_eps(double z, double eps) {
  return (1.0 / std::numbers::pi) * eps / (eps * eps + z * z);
}

Gradient central_gradient(const Field& f) {
  const int w = f.width();
  const int h = f.height();
  Gradient g{Field(w, h), Field(w, h)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.dx(x, y) = 0.5 * (f.clamped(x + 1, y) - f.clamped(x - 1, y));
      g.dy(x, y) = 0.5 * (f.clamped(x, y + 1) - f.clamped(x, y - 1));
    }
  }
  return g;
}

Field curvature(const Field& phi, double eta) {
  const int w = phi.width();
  const int h = phi.height();
  Field kappa(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double c = phi(x, y);
      const double e = phi.clamped(x + 1, y);
      const double wv = phi.clamped(x - 1, y);
      const double n = phi.clamped(x, y - 1);
      const double s = phi.clamped(x, y + 1);
      const double px = 0.5 * (e - wv);
      const double py = 0.5 * (s - n);
      const double pxx = e - 2.0 * c + wv;
      const double pyy = s - 2.0 * c + n;
      const double pxy = 0.25 * (phi.clamped(x + 1, y + 1) - phi.clamped(x + 1, y - 1) -
                                 phi.clamped(x - 1, y + 1) + phi.clamped(x - 1, y - 1));
      const double g2 = px * px + py * py + eta;
      kappa(x, y) = (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / (g2 * std::sqrt(g2));
    }
  }
  return kappa;
}

NormalField normal_field(const Field& phi, double eta) {
  Gradient g = central_gradient(phi);
  const std::size_t n = phi.size();
  auto gx = g.dx.data();
  auto gy = g.dy.data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / std::sqrt(gx[i] * gx[i] + gy[i] * gy[i] + eta);
    gx[i] *= inv;
    gy[i] *= inv;
  }
  return {std::move(g.dx), std::move(g.dy)};
}

namespace {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), in place on `f`.
void distance_1d(std::vector<double>& f, std::vector<int>& v, std::vector<double>& z, std::vector<double>& out) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    // z[0] = -inf, so k never drops below zero.
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), inf);
  } else {
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[j + 1] < q) ++j;
      const double d = q - v[j];
      out[q] = d * d + f[v[j]];
    }
  }
  f.swap(out);
}

}  // namespace

Field squared_distance_to(const Mask& targets) {
  const int w = targets.width();
  const int h = targets.height();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Field d(w, h, inf);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets.data()[i]) d.data()[i] = 0.0;
  }
  // Columns, then rows.
#pragma omp parallel
  {
    const int n = std::max(w, h);
    std::vector<double> f, out;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
#pragma omp for schedule(static)
    for (int x = 0; x < w; ++x) {
      f.resize(h);
      out.resize(h);
      for (int y = 0; y < h; ++y) f[y] = d(x, y);
      distance_1d(f, v, z, out);
      for (int y = 0; y < h; ++y) d(x, y) = f[y];
    }
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      f.assign(d.row(y).begin(), d.row(y).end());
      out.resize(w);
      distance_1d(f, v, z, out);
      std::copy(f.begin(), f.end(), d.row(y).begin());
    }
  }
  return d;
}

ReinitResult reinit_sdf(const Field& phi) {
  const int w = phi.width();
  const int h = phi.height();
  Mask fg(w, h), bg(w, h);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const bool f = is_foreground(phi.data()[i]);
    fg.data()[i] = f;
    bg.data()[i] = !f;
  }
  const std::size_t n_fg = count_set(fg);
  if (n_fg == 0 || n_fg == phi.size()) return {phi, true};

  const Field to_bg = squared_distance_to(bg);
  const Field to_fg = squared_distance_to(fg);
  const Gradient g = central_gradient(phi);

  Field out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool f = fg(x, y) != 0;
      bool interface = false;
      for (auto [ox, oy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int nx = x + ox;
        const int ny = y + oy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if ((fg(nx, ny) != 0) != f) interface = true;
      }
      if (interface) {
        const double gm = std::hypot(g.dx(x, y), g.dy(x, y));
        const double v = gm > 0.0 ? phi(x, y) / gm : (f ? 1.0 : -1.0);
        out(x, y) = std::clamp(v, -1.0, 1.0);
        if (f && out(x, y) < 0.0) out(x, y) = 0.0;
      } else {
        const double dist = std::sqrt(f ? to_bg(x, y) : to_fg(x, y)) - 0.5;
        out(x, y) = f ? dist : -dist;
      }
    }
  }
  return {std::move(out), false};
}

Field median_filter(const Field& phi, int k) {
  if (k < 1 || k % 2 == 0) throw Error(Errc::InvalidArgument, "median window must be odd and >= 1");
  if (k == 1) return phi;
  const int w = phi.width();
  const int h = phi.height();
  const int r = k / 2;
  const auto mid = static_cast<std::ptrdiff_t>(k * k / 2);
  Field out(w, h);
#pragma omp parallel
  {
    std::vector<double> win(static_cast<std::size_t>(k * k));
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::size_t i = 0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) win[i++] = phi.clamped(x + dx, y + dy);
        }
        std::nth_element(win.begin(), win.begin() + mid, win.end());
        out(x, y) = win[static_cast<std::size_t>(mid)];
      }
    }
  }
  return out;
}

Field init_ellipse(const EllipseSpec& spec, int width, int height) {
  if (!(spec.rx > 0.0) || !(spec.ry > 0.0)) {
    throw Error(Errc::InvalidArgument, "ellipse semi-axes must be positive");
  }
  Field alg(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x - spec.cx) / spec.rx;
      const double v = (y - spec.cy) / spec.ry;
      alg(x, y) = 1.0 - u * u - v * v;
    }
  }
  ReinitResult r = reinit_sdf(alg);
  if (r.all_one_sign) throw Error(Errc::EllipseOutOfFrame, "ellipse does not cross the image frame");
  return std::move(r.phi);
}

}  // namespace occstereo

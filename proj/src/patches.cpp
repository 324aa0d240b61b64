#include "occstereo/patches.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "occstereo/level_set.hpp"

namespace occstereo {

namespace {

std::vector<int> origins(int extent, int side, int stride) {
  std::vector<int> o;
  for (int v = 0; v + side <= extent; v += stride) o.push_back(v);
  if (o.back() != extent - side) o.push_back(extent - side);
  return o;
}

std::vector<std::pair<int, int>> cover(const std::vector<int>& o, int extent, int side) {
  std::vector<std::pair<int, int>> c(static_cast<std::size_t>(extent));
  int lo = 0;
  int hi = 0;
  const int n = static_cast<int>(o.size());
  for (int v = 0; v < extent; ++v) {
    while (lo < n && o[lo] + side <= v) ++lo;
    while (hi < n && o[hi] <= v) ++hi;
    c[v] = {lo, hi};
  }
  return c;
}

}  // namespace

PatchHierarchy PatchHierarchy::build(int width, int height, const HierarchyParams& params) {
  if (width < 1 || height < 1) throw Error(Errc::InvalidArgument, "hierarchy needs a non-empty grid");
  if (params.levels < 1) throw Error(Errc::InvalidArgument, "hierarchy needs at least one level");
  if (params.levels > 1 && params.base < 1) throw Error(Errc::InvalidArgument, "patch base side must be >= 1");
  if (!(params.stride_ratio > 0.0) || params.stride_ratio > 1.0) {
    throw Error(Errc::InvalidArgument, "stride ratio must lie in (0, 1]");
  }

  PatchHierarchy h;
  h.width_ = width;
  h.height_ = height;
  for (int i = 0; i < params.levels; ++i) {
    PatchLevel lv;
    lv.side = i == 0 ? 1 : params.base << (i - 1);
    lv.stride = i == 0 ? 1 : std::max(1, static_cast<int>(std::lround(lv.side * params.stride_ratio)));
    if (lv.side > width || lv.side > height) {
      throw Error(Errc::GridTooSmall, "patch side " + std::to_string(lv.side) + " exceeds the " +
                                          std::to_string(width) + "x" + std::to_string(height) + " grid");
    }
    lv.first = h.patches_.size();
    lv.xs = origins(width, lv.side, lv.stride);
    lv.ys = origins(height, lv.side, lv.stride);
    lv.col_cover = cover(lv.xs, width, lv.side);
    lv.row_cover = cover(lv.ys, height, lv.side);
    for (int y0 : lv.ys) {
      for (int x0 : lv.xs) h.patches_.push_back({x0, y0, lv.side, i});
    }
    h.levels_.push_back(std::move(lv));
  }

  h.child_begin_.assign(h.patches_.size() + 1, 0);
  for (std::size_t li = 1; li < h.levels_.size(); ++li) {
    const PatchLevel& lv = h.levels_[li];
    const PatchLevel& below = h.levels_[li - 1];
    std::vector<int> pos_x(width, -1), pos_y(height, -1);
    for (std::size_t i = 0; i < below.xs.size(); ++i) pos_x[below.xs[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < below.ys.size(); ++i) pos_y[below.ys[i]] = static_cast<int>(i);
    const int cs = below.side;
    const int per_axis = lv.side % cs == 0 ? lv.side / cs : 0;
    for (std::size_t p = lv.first; p < lv.first + lv.count(); ++p) {
      const Patch& pa = h.patches_[p];
      std::vector<int> kids;
      bool tiled = per_axis > 0;
      for (int b = 0; tiled && b < per_axis; ++b) {
        for (int a = 0; tiled && a < per_axis; ++a) {
          const int ix = pos_x[pa.x0 + a * cs];
          const int iy = pos_y[pa.y0 + b * cs];
          if (ix < 0 || iy < 0) {
            tiled = false;
          } else {
            kids.push_back(static_cast<int>(below.first + static_cast<std::size_t>(iy) * below.xs.size() + ix));
          }
        }
      }
      if (tiled) h.child_index_.insert(h.child_index_.end(), kids.begin(), kids.end());
      h.child_begin_[p + 1] = h.child_index_.size();
    }
  }
  // Level-0 entries were left at zero; make the prefix array monotone.
  for (std::size_t p = 1; p < h.child_begin_.size(); ++p) {
    h.child_begin_[p] = std::max(h.child_begin_[p], h.child_begin_[p - 1]);
  }
  return h;
}

void aggregate_patch_costs(const PatchHierarchy& h, const Volume& m, const DisparityMap* disparity, double beta,
                           PatchCurves& curves) {
  if (m.width() != h.width() || m.height() != h.height()) {
    throw Error(Errc::InvalidArgument, "cost volume and hierarchy disagree in size");
  }
  if (disparity && (disparity->width() != h.width() || disparity->height() != h.height())) {
    throw Error(Errc::InvalidArgument, "disparity map and hierarchy disagree in size");
  }
  if (curves.count() != h.size() || curves.d_max() != m.d_max()) curves = PatchCurves(h.size(), m.d_max());
  const int nd = m.depth();
  const auto& levels = h.levels();

  const PatchLevel& l0 = levels[0];
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      std::span<double> c = curves.curve(l0.first + static_cast<std::size_t>(y) * h.width() + x);
      const auto mc = m.curve(x, y);
      if (disparity && beta != 0.0) {
        const double dd = (*disparity)(x, y);
        for (int d = 0; d < nd; ++d) c[d] = mc[d] + beta * std::abs(d - dd);
      } else {
        std::copy(mc.begin(), mc.end(), c.begin());
      }
    }
  }

  for (std::size_t li = 1; li < levels.size(); ++li) {
    const PatchLevel& lv = levels[li];
    const auto n = static_cast<std::ptrdiff_t>(lv.count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const std::size_t p = lv.first + static_cast<std::size_t>(k);
      std::span<double> c = curves.curve(p);
      std::fill(c.begin(), c.end(), 0.0);
      const auto kids = h.children(p);
      if (!kids.empty()) {
        for (int child : kids) {
          const auto cc = curves.curve(static_cast<std::size_t>(child));
          for (int d = 0; d < nd; ++d) c[d] += cc[d];
        }
      } else {
        const Patch& pa = h.patches()[p];
        for (int y = pa.y0; y < pa.y0 + pa.side; ++y) {
          for (int x = pa.x0; x < pa.x0 + pa.side; ++x) {
            const auto cc = curves.curve(l0.first + static_cast<std::size_t>(y) * h.width() + x);
            for (int d = 0; d < nd; ++d) c[d] += cc[d];
          }
        }
      }
    }
  }
}

Message update_message(std::span<const double> curve, int d_max) {
  if (curve.size() != static_cast<std::size_t>(d_max + 1)) {
    throw Error(Errc::InvalidArgument, "cost curve length must be d_max + 1");
  }
  std::size_t best = 0;
  for (std::size_t d = 1; d < curve.size(); ++d) {
    if (curve[d] < curve[best]) best = d;
  }
  const double mean = std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
  const double spread = mean - curve[best];
  Message msg;
  msg.d = static_cast<double>(best);
  msg.sigma = spread < kFlatCurveThreshold ? std::numeric_limits<double>::infinity() : d_max / spread;
  return msg;
}

double message_curve(std::span<const double> curve, const Message& msg, double d) {
  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
  const double z = (d - msg.d) / msg.sigma;
  return *hi - (*hi - *lo) * std::exp(-0.5 * z * z);
}

std::vector<std::uint8_t> update_validity(const PatchHierarchy& h, const Field& phi, const Field& phi_plus) {
  require_same_shape(phi, phi_plus, "update_validity");
  if (phi.width() != h.width() || phi.height() != h.height()) {
    throw Error(Errc::InvalidArgument, "level set and hierarchy disagree in size");
  }
  const std::size_t n = h.size();
  std::vector<double> max_phi(n), min_plus(n);
  std::vector<std::uint8_t> valid(n);
  const auto& levels = h.levels();
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const PatchLevel& lv = levels[li];
    const auto cnt = static_cast<std::ptrdiff_t>(lv.count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < cnt; ++k) {
      const std::size_t p = lv.first + static_cast<std::size_t>(k);
      const Patch& pa = h.patches()[p];
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      const auto kids = h.children(p);
      if (!kids.empty()) {
        for (int c : kids) {
          hi = std::max(hi, max_phi[c]);
          lo = std::min(lo, min_plus[c]);
        }
      } else {
        for (int y = pa.y0; y < pa.y0 + pa.side; ++y) {
          for (int x = pa.x0; x < pa.x0 + pa.side; ++x) {
            hi = std::max(hi, phi(x, y));
            lo = std::min(lo, phi_plus(x, y));
          }
        }
      }
      max_phi[p] = hi;
      min_plus[p] = lo;
      valid[p] = (hi > 0.0) != (lo < 0.0);
    }
  }
  return valid;
}

void update_messages(const PatchHierarchy& h, const PatchCurves& curves, std::span<const std::uint8_t> validity,
                     std::vector<PatchState>& states) {
  if (curves.count() != h.size() || validity.size() != h.size()) {
    throw Error(Errc::InvalidArgument, "patch curves or validity do not match the hierarchy");
  }
  states.resize(h.size());
  const auto n = static_cast<std::ptrdiff_t>(h.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    PatchState& s = states[p];
    s.valid = validity[p] != 0;
    const Message msg = update_message(curves.curve(p), curves.d_max());
    s.d = msg.d;
    s.sigma = msg.sigma;
  }
}

Consensus update_consensus(const PatchHierarchy& h, std::span<const PatchState> states) {
  if (states.size() != h.size()) throw Error(Errc::InvalidArgument, "patch states do not match the hierarchy");
  const int w = h.width();
  const int ht = h.height();
  Consensus c{Field(w, ht, std::numeric_limits<double>::quiet_NaN()),
              Field(w, ht, std::numeric_limits<double>::infinity())};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < ht; ++y) {
    for (int x = 0; x < w; ++x) {
      double precision = 0.0;
      double weighted = 0.0;
      h.for_each_covering(x, y, [&](std::size_t p) {
        const PatchState& s = states[p];
        if (!s.valid || !std::isfinite(s.sigma)) return;
        const double inv = 1.0 / (s.sigma * s.sigma);
        precision += inv;
        weighted += s.d * inv;
      });
      if (precision > 0.0) {
        const double var = 1.0 / precision;
        c.sigma(x, y) = std::sqrt(var);
        c.mean(x, y) = weighted * var;
      }
    }
  }
  return c;
}

}  // namespace occstereo

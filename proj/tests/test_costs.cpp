#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "occstereo/costs.hpp"
#include "occstereo/reference.hpp"

using namespace occstereo;
using namespace testing;

namespace {

Field mirror_x(const Field& f) {
  Field out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) out(x, y) = f(f.width() - 1 - x, y);
  }
  return out;
}

}  // namespace

TEST_CASE("matching cost of identical images is zero at d = 0") {
  const Field img = random_field(20, 10, 3);
  const CostVolume cv = build_matching_cost({img, img, 5});
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 20; ++x) CHECK(cv.values(x, y, 0) == 0.0);
  }
}

TEST_CASE("matching cost recovers a constant shift") {
  // Views sit at x ± d, so a right image shifted by 2·6 columns has disparity 6.
  const int w = 64, h = 8, shift = 12;
  const Field left = random_field(w, h, 9);
  Field right(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) right(x, y) = left.clamped(x + shift, y);
  }
  const CostVolume cv = build_matching_cost({left, right, 10});
  for (int y = 0; y < h; ++y) {
    for (int x = 10; x < w - 16; ++x) {
      const auto c = cv.values.curve(x, y);
      CHECK(std::min_element(c.begin(), c.end()) - c.begin() == 6);
    }
  }
}

TEST_CASE("matching cost of constant images is zero") {
  const Field c(16, 6, 0.4);
  const CostVolume cv = build_matching_cost({c, c, 4});
  for (double v : cv.values.data()) CHECK(v == 0.0);
}

TEST_CASE("matching cost mirror symmetry") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Field l = random_field(25, 7, seed), r = random_field(25, 7, seed + 100);
    const CostVolume a = build_matching_cost({l, r, 6});
    const CostVolume b = build_matching_cost({mirror_x(r), mirror_x(l), 6});
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 25; ++x) {
        for (int d = 0; d <= 6; ++d) CHECK(std::abs(a.values(x, y, d) - b.values(24 - x, y, d)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("matching cost matches the serial reference and flags out-of-bounds") {
  const StereoPair p{random_field(30, 9, 4), random_field(30, 9, 5), 7};
  const CostVolume cv = build_matching_cost(p);
  CHECK(std::equal(cv.values.data().begin(), cv.values.data().end(), reference::matching_cost(p).data().begin()));
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 30; ++x) {
      for (int d = 0; d <= 7; ++d) {
        const bool expect = x + kViewShift * d > 29 || x - kViewShift * d < 0;
        CHECK(static_cast<bool>(cv.out_of_bounds(x, y, d)) == expect);
        CHECK(cv.values(x, y, d) >= 0.0);
        CHECK(cv.values(x, y, d) <= 1.0);
      }
    }
  }
}

TEST_CASE("gaussian derivative kernel") {
  const auto k = gaussian_derivative_kernel(1.5);
  double l1 = 0.0, step = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    l1 += std::abs(k[i]);
    if (i > k.size() / 2) step += k[i];
    CHECK(k[i] == doctest::Approx(-k[k.size() - 1 - i]));
  }
  CHECK(l1 == doctest::Approx(1.0));
  CHECK(step == doctest::Approx(0.5));
  CHECK_THROWS_AS(gaussian_derivative_kernel(0.0), Error);
}

TEST_CASE("occlusion boundary cost") {
  const BoundaryParams bp{};
  SUBCASE("constant in x hits the cap") {
    Volume m(20, 3, 4, 0.37);
    const Volume b = build_occ_boundary_cost(m, bp);
    for (double v : b.data()) CHECK(v == bp.b_cap);
  }
  SUBCASE("unit step: minimum at the step, halves when M doubles") {
    const int w = 40, x0 = 20;
    Volume m(w, 1, 0), m2(w, 1, 0);
    for (int x = x0; x < w; ++x) {
      m(x, 0, 0) = 0.5;
      m2(x, 0, 0) = 1.0;
    }
    BoundaryParams loose = bp;
    loose.eps_b = 0.0;
    loose.b_cap = 1e300;
    const Volume b = build_occ_boundary_cost(m, loose);
    const Volume b2 = build_occ_boundary_cost(m2, loose);
    int argmin = 0;
    for (int x = 0; x < w; ++x) {
      if (b(x, 0, 0) < b(argmin, 0, 0)) argmin = x;
    }
    CHECK(std::abs(argmin - (x0 - 0.5)) <= 0.5);
    CHECK(b2(argmin, 0, 0) == doctest::Approx(b(argmin, 0, 0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("bounds") {
    Volume m(30, 4, 5);
    const Field r = random_field(30 * 4 * 6, 1, 8);
    std::copy(r.data().begin(), r.data().end(), m.data().begin());
    const BoundaryCostVolume b = build_occ_boundary_cost(m, bp);
    for (double v : b.data()) {
      CHECK(v > 0.0);
      CHECK(v <= bp.b_cap);
    }
  }
}

TEST_CASE("monocular boundary cost") {
  const BoundaryParams bp{};
  SUBCASE("constant images hit the cap") {
    const Field c(12, 12, 0.5);
    const BoundaryCostVolume b = build_mono_boundary_cost({c, c, 3}, bp);
    for (double v : b.data()) CHECK(v == bp.b_cap);
  }
  SUBCASE("vertical edge gives a local minimum") {
    Field img(30, 5, 0.0);
    for (int y = 0; y < 5; ++y) {
      for (int x = 15; x < 30; ++x) img(x, y) = 1.0;
    }
    const Volume b = build_mono_boundary_cost({img, img, 2}, bp);
    CHECK(b(14, 2, 0) < b(10, 2, 0));
    CHECK(b(14, 2, 0) <= b(13, 2, 0));
    CHECK(b(15, 2, 0) < b(16, 2, 0));
  }
  SUBCASE("d = 0 with identical views") {
    const Field img = random_field(18, 11, 21);
    const Field s = sobel_magnitude(img);
    const Volume b = build_mono_boundary_cost({img, img, 3}, bp);
    for (int y = 0; y < 11; ++y) {
      for (int x = 0; x < 18; ++x) {
        CHECK(b(x, y, 0) == doctest::Approx(std::min(bp.b_cap, 1.0 / (2.0 * s(x, y) + bp.eps_b))));
      }
    }
  }
}

TEST_CASE("combined boundary weight") {
  const Volume occ(8, 6, 4, 100.0), mono(8, 6, 4, 100.0);
  const Field t1(8, 6, 2.5);
  const Field only_length = combined_boundary_weight(occ, mono, t1, {0.0, 0.0, 0.1});
  for (double v : only_length.data()) CHECK(v == doctest::Approx(0.1));
  const Field full = combined_boundary_weight(occ, mono, t1, {0.2, 0.8, 0.1});
  for (double v : full.data()) {
    CHECK(v == doctest::Approx(0.2 * 100.0 + 0.8 * 100.0 + 0.1));
  }
  Volume a(8, 6, 4), b(8, 6, 4);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int d = 0; d <= 4; ++d) {
        a(x, y, d) = 1.0 + d;
        b(x, y, d) = 10.0 * d;
      }
    }
  }
  const Field c(8, 6, 3.0);
  const Field wb = combined_boundary_weight(a, b, c, {0.2, 0.8, 0.1});
  for (double v : wb.data()) {
    CHECK(v == doctest::Approx(0.2 * 4.0 + 0.8 * 30.0 + 0.1));
  }
  // Shape values beyond d_max clamp to the last slice.
  const Field high(8, 6, 9.0);
  CHECK(combined_boundary_weight(a, b, high, {1.0, 0.0, 0.0})(3, 3) == doctest::Approx(5.0));
}

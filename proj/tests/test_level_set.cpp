#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "occstereo/level_set.hpp"
#include "occstereo/reference.hpp"

using namespace occstereo;
using namespace testing;

TEST_CASE("heaviside_eps closed forms") {
  CHECK(heaviside_eps(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(heaviside_eps(1.5, 1.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(heaviside_eps(-1e6, 1.0) < 1e-5);
  CHECK(heaviside_eps(1e6, 1.0) > 1.0 - 1e-5);
}

TEST_CASE("heaviside_eps is monotone") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> z(-100.0, 100.0), e(1e-3, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = z(rng), b = z(rng), eps = e(rng);
    if (a <= b) {
      CHECK(heaviside_eps(a, eps) <= heaviside_eps(b, eps));
    } else {
      CHECK(heaviside_eps(a, eps) >= heaviside_eps(b, eps));
    }
  }
}

TEST_CASE("dirac_eps is the derivative of heaviside_eps") {
  CHECK(dirac_eps(0.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(dirac_eps(3.0, 1.5) == dirac_eps(-3.0, 1.5));
  const double h = 1e-4;
  double worst = 0.0;
  for (double eps : {0.5, 1.0, 1.5, 3.0}) {
    for (double z = -50.0; z <= 50.0; z += 0.01) {
      const double fd = (heaviside_eps(z + h, eps) - heaviside_eps(z - h, eps)) / (2 * h);
      worst = std::max(worst, std::abs(fd - dirac_eps(z, eps)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("curvature of disk SDF") {
  for (double r : {10.0, 20.0, 40.0}) {
    const int n = static_cast<int>(2 * r + 20);
    const double c = n / 2.0 + 0.25;
    const Field phi = disk_sdf(n, n, c, c, r);
    const Field k = curvature(phi);
    int checked = 0;
    for (int y = 3; y < n - 3; ++y) {
      for (int x = 3; x < n - 3; ++x) {
        const double rho = std::hypot(x - c, y - c);
        if (std::abs(rho - r) > 1.0) continue;
        // φ > 0 inside, so div(∇φ/|∇φ|) = −1/ρ.
        CHECK(std::abs(k(x, y) * rho + 1.0) < 0.02);
        CHECK(std::abs(std::abs(k(x, y)) - 1.0 / r) < 0.02 / r + 1.0 / (r * (r - 1.0)));
        ++checked;
      }
    }
    CHECK(checked > 10);
  }
}

TEST_CASE("curvature of a plane is zero and scale invariant") {
  const Field phi = plane_x(12, 9);
  const Field k = curvature(phi);
  for (int y = 1; y < 8; ++y) {
    for (int x = 1; x < 11; ++x) CHECK(k(x, y) == 0.0);
  }
  const Field d = disk_sdf(40, 40, 19.5, 20.2, 12.0);
  Field d3 = d;
  for (double& v : d3.data()) v *= 3.0;
  const Field k1 = curvature(d), k3 = curvature(d3);
  for (int y = 3; y < 37; ++y) {
    for (int x = 3; x < 37; ++x) {
      if (std::hypot(x - 19.5, y - 20.2) < 3) continue;
      CHECK(std::abs(k1(x, y) - k3(x, y)) < 1e-6);
    }
  }
}

TEST_CASE("normal_field") {
  Field px = plane_x(8, 8);
  NormalField n = normal_field(px);
  CHECK(n.nx(4, 4) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(n.ny(4, 4) == doctest::Approx(0.0));
  Field py(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) py(x, y) = y;
  }
  n = normal_field(py);
  CHECK(n.nx(4, 4) == doctest::Approx(0.0));
  CHECK(n.ny(4, 4) == doctest::Approx(1.0).epsilon(1e-8));

  const double c = 30.3;
  const Field d = disk_sdf(61, 61, c, c, 20.0);
  n = normal_field(d);
  for (int y = 0; y < 61; ++y) {
    for (int x = 0; x < 61; ++x) {
      CHECK(std::hypot(n.nx(x, y), n.ny(x, y)) <= 1.0 + 1e-12);
      const double rho = std::hypot(x - c, y - c);
      if (rho < 3.0 || x == 0 || y == 0 || x == 60 || y == 60) continue;
      // Inward radial direction (φ grows toward the centre).
      const double cosang = (n.nx(x, y) * (c - x) + n.ny(x, y) * (c - y)) / rho;
      CHECK(std::acos(std::min(1.0, cosang)) < 2.0 * std::numbers::pi / 180.0);
    }
  }
}

TEST_CASE("squared_distance_to matches brute force") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Field r = random_field(23, 17, seed);
    Mask m(23, 17);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = r.data()[i] < 0.05;
    m(5, 5) = 1;
    CHECK(squared_distance_to(m) == reference::squared_distance_to(m));
  }
  const Field none = squared_distance_to(Mask(4, 4));
  CHECK(std::isinf(none(2, 2)));
}

TEST_CASE("reinit_sdf") {
  SUBCASE("binary disk indicator") {
    Field ind(64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) ind(x, y) = std::hypot(x - 32, y - 32) <= 20 ? 1.0 : -1.0;
    }
    const ReinitResult r = reinit_sdf(ind);
    REQUIRE_FALSE(r.all_one_sign);
    CHECK(std::abs(r.phi(32, 32) - 19.5) <= 1.0);
    for (std::size_t i = 0; i < ind.size(); ++i) CHECK((ind.data()[i] >= 0) == (r.phi.data()[i] >= 0));
  }
  SUBCASE("exact SDF is nearly a fixed point") {
    const Field d = disk_sdf(64, 64, 31.7, 32.4, 17.0);
    const ReinitResult r = reinit_sdf(d);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(r.phi.data()[i] - d.data()[i]) < 1.0);
  }
  SUBCASE("eikonal away from the contour") {
    Field alg(80, 60);
    for (int y = 0; y < 60; ++y) {
      for (int x = 0; x < 80; ++x) alg(x, y) = 1.0 - std::pow((x - 40) / 25.0, 2) - std::pow((y - 30) / 15.0, 2);
    }
    const Field phi = reinit_sdf(alg).phi;
    const Gradient g = central_gradient(phi);
    int ok = 0, total = 0;
    for (int y = 1; y < 59; ++y) {
      for (int x = 1; x < 79; ++x) {
        if (std::abs(phi(x, y)) < 2.0 || std::abs(phi(x, y)) > 12.0) continue;
        const double gm = std::hypot(g.dx(x, y), g.dy(x, y));
        ok += gm >= 0.8 && gm <= 1.2;
        ++total;
      }
    }
    CHECK(ok >= 0.95 * total);
  }
  SUBCASE("never flips sign-uniform neighbourhoods") {
    const Field r = random_field(30, 30, 11, -1.0, 1.0);
    Field sm = median_filter(r, 5);
    const Field out = reinit_sdf(sm).phi;
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 30; ++x) {
        CHECK((out(x, y) >= 0) == (sm(x, y) >= 0));
      }
    }
  }
  SUBCASE("all one sign") {
    const Field pos(10, 10, 2.0);
    const ReinitResult r = reinit_sdf(pos);
    CHECK(r.all_one_sign);
    CHECK(r.phi == pos);
  }
}

TEST_CASE("median_filter") {
  const Field c(9, 9, 3.25);
  CHECK(median_filter(c, 7) == c);

  Field spike(15, 15, 0.0);
  spike(7, 7) = 100.0;
  CHECK(median_filter(spike, 7)(7, 7) == 0.0);

  Field fil(21, 21, -1.0);
  for (int y = 0; y < 21; ++y) fil(10, y) = 1.0;
  const Field out = median_filter(fil, 7);
  for (double v : out.data()) CHECK(v < 0.0);

  const Field r = random_field(13, 11, 5);
  std::set<double> values(r.data().begin(), r.data().end());
  const Field med = median_filter(r, 7);
  for (double v : med.data()) CHECK(values.count(v) == 1);

  CHECK(median_filter(r, 1) == r);
  CHECK_THROWS_AS(median_filter(r, 4), Error);
}

TEST_CASE("init_ellipse") {
  const EllipseSpec e{40.0, 30.0, 20.0, 12.0};
  const Field phi = init_ellipse(e, 80, 60);
  CHECK(phi(40, 30) > 0.0);
  CHECK(phi(0, 0) < 0.0);
  for (int t = 0; t < 64; ++t) {
    const double a = 2 * std::numbers::pi * t / 64;
    const double x = e.cx + e.rx * std::cos(a), y = e.cy + e.ry * std::sin(a);
    const int xi = static_cast<int>(std::lround(x)), yi = static_cast<int>(std::lround(y));
    CHECK(std::abs(phi(xi, yi)) < 1.0 + 1e-9);
  }
  try {
    init_ellipse({500.0, 500.0, 5.0, 5.0}, 40, 40);
    FAIL("expected EllipseOutOfFrame");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::EllipseOutOfFrame);
  }
  CHECK_THROWS_AS(init_ellipse({10, 10, 0.0, 3.0}, 20, 20), Error);
}

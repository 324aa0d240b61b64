#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "occstereo/patches.hpp"
#include "occstereo/reference.hpp"

using namespace occstereo;
using namespace testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<PatchState> random_states(std::size_t n, std::mt19937_64& rng, int d_max) {
  std::uniform_real_distribution<double> d(0.0, d_max), s(0.1, 5.0), u(0.0, 1.0);
  std::vector<PatchState> out(n);
  for (PatchState& p : out) {
    p.valid = u(rng) < 0.7;
    p.d = d(rng);
    p.sigma = u(rng) < 0.1 ? kInf : s(rng);
  }
  return out;
}

// Direct per-pixel product of Gaussians over every patch of the hierarchy.
Consensus brute_consensus(const PatchHierarchy& h, const std::vector<PatchState>& states) {
  Consensus c{Field(h.width(), h.height()), Field(h.width(), h.height(), kInf)};
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      long double prec = 0.0L, num = 0.0L;
      for (std::size_t p = 0; p < h.size(); ++p) {
        if (!h.patches()[p].contains(x, y) || !states[p].valid || !std::isfinite(states[p].sigma)) continue;
        const long double inv = 1.0L / (static_cast<long double>(states[p].sigma) * states[p].sigma);
        prec += inv;
        num += inv * states[p].d;
      }
      if (prec > 0) {
        c.sigma(x, y) = static_cast<double>(std::sqrt(1.0L / prec));
        c.mean(x, y) = static_cast<double>(num / prec);
      } else {
        c.mean(x, y) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return c;
}

std::vector<double> abs_curve(int center, int d_max) {
  std::vector<double> c(d_max + 1);
  for (int d = 0; d <= d_max; ++d) c[d] = std::abs(d - center);
  return c;
}

}  // namespace

TEST_CASE("hierarchy layout") {
  const PatchHierarchy h = PatchHierarchy::build(16, 16, {3, 4, 0.5});
  REQUIRE(h.levels().size() == 3);
  CHECK(h.levels()[0].side == 1);
  CHECK(h.levels()[1].side == 4);
  CHECK(h.levels()[2].side == 8);
  CHECK(h.levels()[0].stride == 1);
  CHECK(h.levels()[1].stride == 2);
  CHECK(h.levels()[2].stride == 4);
  CHECK(h.levels()[0].count() == 256);
  CHECK(h.levels()[1].count() == 49);
  CHECK(h.levels()[2].count() == 9);

  const PatchHierarchy px = PatchHierarchy::build(7, 5, {1, 4, 0.5});
  CHECK(px.size() == 35);
  for (const Patch& p : px.patches()) CHECK(p.side == 1);

  CHECK_THROWS_AS(PatchHierarchy::build(12, 40, {4, 4, 0.5}), Error);
  try {
    PatchHierarchy::build(12, 40, {4, 4, 0.5});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GridTooSmall);
  }
}

TEST_CASE("hierarchy coverage and tiling") {
  for (auto [w, hgt] : {std::pair{16, 16}, std::pair{37, 29}, std::pair{64, 48}}) {
    const PatchHierarchy h = PatchHierarchy::build(w, hgt, {4, 4, 0.5});
    for (std::size_t li = 0; li < h.levels().size(); ++li) {
      const PatchLevel& lv = h.levels()[li];
      Grid<int> hits(w, hgt, 0);
      for (std::size_t p = lv.first; p < lv.first + lv.count(); ++p) {
        const Patch& pa = h.patches()[p];
        for (int y = pa.y0; y < pa.y0 + pa.side; ++y) {
          for (int x = pa.x0; x < pa.x0 + pa.side; ++x) ++hits(x, y);
        }
      }
      for (int v : hits.data()) CHECK(v >= 1);
    }
    for (int y = 0; y < hgt; ++y) {
      for (int x = 0; x < w; ++x) {
        std::set<std::size_t> a, b;
        h.for_each_covering(x, y, [&](std::size_t p) { a.insert(p); });
        for (std::size_t p = 0; p < h.size(); ++p) {
          if (h.patches()[p].contains(x, y)) b.insert(p);
        }
        CHECK(a == b);
      }
    }
    for (std::size_t p = 0; p < h.size(); ++p) {
      const auto kids = h.children(p);
      if (kids.empty()) continue;
      const Patch& pa = h.patches()[p];
      int area = 0;
      std::set<std::pair<int, int>> cells;
      for (int k : kids) {
        const Patch& c = h.patches()[k];
        CHECK(c.level == pa.level - 1);
        for (int y = c.y0; y < c.y0 + c.side; ++y) {
          for (int x = c.x0; x < c.x0 + c.side; ++x) {
            CHECK(pa.contains(x, y));
            cells.insert({x, y});
            ++area;
          }
        }
      }
      CHECK(area == pa.side * pa.side);
      CHECK(cells.size() == static_cast<std::size_t>(area));
    }
  }
}

TEST_CASE("patch validity truth table") {
  const PatchHierarchy h = PatchHierarchy::build(8, 8, {2, 4, 0.5});
  const std::size_t first = h.levels()[1].first;  // patch at (0,0), side 4
  SUBCASE("fully foreground") {
    const auto v = update_validity(h, Field(8, 8, 2.0), Field(8, 8, 2.0));
    CHECK(v[0] == 1);
    CHECK(v[first] == 1);
  }
  SUBCASE("occluded background pixel") {
    Field phi(8, 8, -2.0), plus(8, 8, -2.0);
    plus(1, 1) = 0.5;
    const auto v = update_validity(h, phi, plus);
    CHECK(v[9] == 0);
    CHECK(v[0] == 1);
  }
  SUBCASE("straddling foreground and visible background") {
    Field phi(8, 8, -2.0);
    phi(1, 1) = 1.0;
    const auto v = update_validity(h, phi, phi);
    CHECK(v[first] == 0);
    CHECK(v[9] == 1);
    CHECK(v[0] == 1);
  }
  SUBCASE("patch fully inside an occluded run") {
    const auto v = update_validity(h, Field(8, 8, -1.0), Field(8, 8, 1.0));
    CHECK(v[first] == 0);
  }
}

TEST_CASE("patch costs") {
  const PatchHierarchy h = PatchHierarchy::build(12, 12, {3, 4, 0.5});
  Volume m(12, 12, 6);
  const Field r = random_field(12 * 12 * 7, 1, 31);
  std::copy(r.data().begin(), r.data().end(), m.data().begin());

  PatchCurves c;
  aggregate_patch_costs(h, m, nullptr, 0.0, c);
  for (int d = 0; d <= 6; ++d) CHECK(c.curve(5 * 12 + 3)[d] == m(3, 5, d));

  const DisparityMap dm = random_field(12, 12, 32, 0.0, 6.0);
  for (double beta : {0.0, 0.4 / 6}) {
    aggregate_patch_costs(h, m, &dm, beta, c);
    const PatchCurves ref = reference::aggregate_patch_costs(h, m, &dm, beta);
    for (std::size_t p = 0; p < h.size(); ++p) {
      for (int d = 0; d <= 6; ++d) CHECK(std::abs(c.curve(p)[d] - ref.curve(p)[d]) <= 1e-10);
      const auto kids = h.children(p);
      if (kids.empty()) continue;
      for (int d = 0; d <= 6; ++d) {
        double s = 0.0;
        for (int k : kids) s += c.curve(k)[d];
        CHECK(c.curve(p)[d] == s);
      }
    }
  }

  const PatchHierarchy one = PatchHierarchy::build(1, 1, {1, 4, 0.5});
  const DisparityMap five(1, 1, 5.0);
  aggregate_patch_costs(one, Volume(1, 1, 10), &five, 1.0, c);
  for (int d = 0; d <= 10; ++d) CHECK(c.curve(0)[d] == std::abs(d - 5.0));
}

TEST_CASE("update_message") {
  const auto c = abs_curve(5, 10);
  Message m = update_message(c, 10);
  CHECK(m.d == 5.0);
  CHECK(m.sigma == doctest::Approx(11.0 / 3.0).epsilon(1e-14));

  CHECK(std::isinf(update_message(std::vector<double>(11, 2.5), 10).sigma));

  std::vector<double> two(11, 4.0);
  two[3] = two[7] = 1.0;
  CHECK(update_message(two, 10).d == 3.0);

  std::vector<double> affine(c), shifted(c);
  for (double& v : affine) v = 3.7 * v - 2.0;
  for (double& v : shifted) v += 11.0;
  CHECK(update_message(affine, 10).d == 5.0);
  CHECK(update_message(shifted, 10).d == 5.0);
  CHECK(update_message(shifted, 10).sigma == doctest::Approx(m.sigma).epsilon(1e-12));

  CHECK_THROWS_AS(update_message(c, 9), Error);
}

TEST_CASE("message_curve") {
  const auto c = abs_curve(5, 10);
  const Message m = update_message(c, 10);
  CHECK(message_curve(c, m, m.d) == 0.0);
  CHECK(message_curve(c, m, 1e9) == 5.0);
  CHECK(message_curve(c, m, -1e9) == 5.0);
  CHECK(message_curve(c, m, m.d + m.sigma) == doctest::Approx(5.0 - 5.0 * std::exp(-0.5)));
  CHECK(message_curve(c, m, m.d - m.sigma) == doctest::Approx(5.0 - 5.0 * std::exp(-0.5)));
}

TEST_CASE("consensus examples") {
  const PatchHierarchy h = PatchHierarchy::build(1, 1, {1, 4, 0.5});
  const PatchHierarchy h2 = PatchHierarchy::build(4, 4, {2, 4, 0.5});
  // Pixel (0,0) of h2 is covered by its own pixel patch and one 4x4 patch.
  std::vector<PatchState> s(h2.size(), PatchState{false, 0.0, 1.0});
  s[0] = {true, 5.0, 1.0};
  s[16] = {true, 7.0, 1.0};
  Consensus c = update_consensus(h2, s);
  CHECK(c.mean(0, 0) == doctest::Approx(6.0));
  CHECK(c.sigma(0, 0) * c.sigma(0, 0) == doctest::Approx(0.5));
  CHECK(c.mean(3, 3) == 7.0);
  CHECK(c.sigma(3, 3) == 1.0);

  s[16].sigma = kInf;
  c = update_consensus(h2, s);
  CHECK(c.mean(0, 0) == 5.0);
  CHECK(c.sigma(0, 0) == 1.0);
  CHECK(std::isinf(c.sigma(3, 3)));
  CHECK_FALSE(c.informative(3, 3));

  const std::vector<PatchState> one{{true, 2.5, 0.75}};
  c = update_consensus(h, one);
  CHECK(c.mean(0, 0) == 2.5);
  CHECK(c.sigma(0, 0) == 0.75);
}

TEST_CASE("consensus equals brute force and the serial reference") {
  const PatchHierarchy h = PatchHierarchy::build(12, 12, {2, 4, 0.5});
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto states = random_states(h.size(), rng, 16);
    const Consensus fast = update_consensus(h, states);
    const Consensus slow = brute_consensus(h, states);
    const Consensus ref = reference::update_consensus(h, states);
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) {
        CHECK(std::isfinite(fast.sigma(x, y)) == std::isfinite(slow.sigma(x, y)));
        if (!std::isfinite(slow.sigma(x, y))) continue;
        CHECK(rel_err(fast.mean(x, y), slow.mean(x, y)) <= 1e-12);
        CHECK(rel_err(fast.sigma(x, y), slow.sigma(x, y)) <= 1e-12);
        CHECK(rel_err(fast.mean(x, y), ref.mean(x, y)) <= 1e-13);
        CHECK(fast.sigma(x, y) == ref.sigma(x, y));
      }
    }
  }
}

TEST_CASE("adding a valid patch never increases sigma") {
  const PatchHierarchy h = PatchHierarchy::build(16, 16, {3, 4, 0.5});
  std::mt19937_64 rng(5);
  auto states = random_states(h.size(), rng, 20);
  for (int k = 0; k < 40; ++k) {
    const Consensus before = update_consensus(h, states);
    std::size_t p = rng() % h.size();
    while (states[p].valid && std::isfinite(states[p].sigma)) p = rng() % h.size();
    states[p].valid = true;
    states[p].sigma = 0.5 + (rng() % 100) / 10.0;
    const Consensus after = update_consensus(h, states);
    for (std::size_t i = 0; i < before.sigma.size(); ++i) CHECK(after.sigma.data()[i] <= before.sigma.data()[i]);
  }
}

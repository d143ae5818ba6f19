#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "pwdyn/error.hpp"
#include "pwdyn/orbit.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

TEST_CASE("orbit basics") {
  const PiecewiseMap tent = fixture("tent");
  CHECK(orbit(tent, 0.5, 10).terminated_at_exceptional == std::size_t{0});

  const OrbitSegment s = orbit(tent, 0.4, 6);
  pwtest::Rational r{2, 5};
  for (double y : s.iterates) {
    r = pwtest::tent_exact(r);
    CHECK(y == doctest::Approx(r.value()).epsilon(1e-12));
  }
  CHECK(s.log_deriv_prefix.size() == s.iterates.size() + 1);
  CHECK(s.log_deriv_prefix.back() == doctest::Approx(6 * std::log(2.0)));

  const OrbitSegment d = orbit(fixture("doubling"), 1.0 / 3.0, 3);
  pwtest::Rational q{1, 3};
  for (double y : d.iterates) {
    q = pwtest::doubling_exact(q);
    CHECK(y == doctest::Approx(q.value()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(orbit(tent, 1.5, 3), OutOfRange);
}

TEST_CASE("omega_cover of the logistic 2-cycle") {
  const auto oracle = pwtest::logistic_two_cycle(3.2);
  const IntervalCover c = omega_cover(fixture("logistic3.2"), 0.3, 1000, 10000, 1e-3);
  REQUIRE(c.cells.size() == 2);
  CHECK(c.cells[0].contains_closed(oracle.lo));
  CHECK(c.cells[1].contains_closed(oracle.hi));
  CHECK(c.max_cell() <= 1e-3 + 1e-12);
  CHECK(omega_cover(fixture("tent"), 0.3, 10, 0, 1e-3).empty());
}

TEST_CASE("omega_cover of the tent fills the interval with jitter") {
  const IntervalCover c = omega_cover(fixture("tent"), 0.3141, 1000, 1000000, 1e-2, {1e-13, 5});
  CHECK(c.measure() >= 0.98);
}

TEST_CASE("omega_cover preconditions") {
  CHECK_THROWS_AS(omega_cover(fixture("tent"), 0.3, 10, 10, 1e-7), PreconditionError);
}

TEST_CASE("cover set operations") {
  IntervalCover a{0.1, {{0.0, 0.2}, {0.5, 0.6}}};
  IntervalCover b{0.1, {{0.1, 0.3}}};
  CHECK(symmetric_difference(a, b) == doctest::Approx(0.1 + 0.1 + 0.1));
  CHECK(cover_union(a, b).measure() == doctest::Approx(0.4));
  CHECK(uncovered_measure(a, b, 0.0) == doctest::Approx(0.1 + 0.1));
  CHECK(a.contains(0.55));
  CHECK_FALSE(a.contains(0.4));
}

TEST_CASE("detect_periodic_like") {
  // The map with a common lateral limit at c: left branch rises towards c,
  // right branch falls towards it.
  const PiecewiseMap g = fixture("gap_map");
  for (Side s : {Side::Left, Side::Right}) {
    const auto p = detect_periodic_like(g, {0.5, s});
    REQUIRE(p.has_value());
    CHECK(p->period == 1);
    CHECK(p->attracting);
  }
  CHECK(detect_periodic_like(g, {0.5, Side::Left})->lateral_multiplier == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(detect_periodic_like(g, {0.5, Side::Right})->lateral_multiplier == doctest::Approx(0.3).epsilon(1e-3));

  const auto l2 = detect_periodic_like(fixture("logistic2"), {0.5, Side::Left});
  REQUIRE(l2.has_value());
  CHECK(l2->period == 1);
  CHECK(l2->lateral_multiplier == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(l2->attracting);

  CHECK_FALSE(detect_periodic_like(fixture("tent"), {0.5, Side::Left}).has_value());
}

TEST_CASE("find_periodic_points on the tent") {
  const auto pts = find_periodic_points(fixture("tent"), 2);
  // Oracle: fixed points of the linear branches and the 2-cycle {2/5, 4/5}.
  const std::vector<std::pair<double, std::size_t>> want{{0.0, 1}, {0.4, 2}, {2.0 / 3.0, 1}, {0.8, 2}};
  REQUIRE(pts.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(pts[i].point == doctest::Approx(want[i].first).epsilon(1e-12));
    CHECK(pts[i].period == want[i].second);
    CHECK(pts[i].multiplier == doctest::Approx(std::pow(2.0, static_cast<double>(want[i].second))));
  }
}

TEST_CASE("find_periodic_points on logistic 3.2") {
  const auto oracle = pwtest::logistic_two_cycle(3.2);
  const auto pts = find_periodic_points(fixture("logistic3.2"), 2);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].point == doctest::Approx(0.0));
  CHECK(pts[0].multiplier == doctest::Approx(3.2));
  CHECK(pts[1].point == doctest::Approx(oracle.lo).epsilon(1e-10));
  CHECK(pts[1].multiplier == doctest::Approx(oracle.multiplier).epsilon(1e-8));
  CHECK(pts[1].multiplier < 1.0);
  CHECK(pts[2].point == doctest::Approx(1.0 - 1.0 / 3.2).epsilon(1e-12));
  CHECK(pts[3].point == doctest::Approx(oracle.hi).epsilon(1e-10));
}

TEST_CASE("find_periodic_points on the doubling map matches the lattice count") {
  const auto pts = find_periodic_points(fixture("doubling"), 3);
  std::map<std::size_t, std::size_t> counts;
  for (const auto& p : pts)
    if (p.point > 0.0 && p.point < 1.0) ++counts[p.period];
  for (unsigned n = 1; n <= 3; ++n) CHECK(counts[n] == pwtest::doubling_exact_period_count(n) - (n == 1 ? 1 : 0));
  // n = 1: the lattice counts x = 0; inside (0,1) nothing is fixed.
  CHECK(counts[2] == 2);
  CHECK(counts[3] == 6);
}

TEST_CASE("basin_sample") {
  const auto oracle = pwtest::logistic_two_cycle(3.2);
  const auto recs = basin_sample(fixture("logistic3.2"), 1000, 11);
  std::size_t matched = 0;
  for (const auto& r : recs)
    if (r.matched && r.matched->period == 2 && std::fabs(r.matched->orbit[0] - oracle.lo) < 1e-6) ++matched;
  CHECK(matched >= 990);

  const auto tent = basin_sample(fixture("tent"), 200, 11);
  for (const auto& r : tent) {
    CHECK_FALSE(r.matched.has_value());
    CHECK(r.cover.measure() >= 0.95);
  }

  const auto a = basin_sample(fixture("logistic4"), 1, 3);
  const auto b = basin_sample(fixture("logistic4"), 1, 3);
  CHECK(a[0].x0 == b[0].x0);
  CHECK(a[0].cover.cells == b[0].cover.cells);
}

TEST_CASE("basin_sample does not depend on the thread count") {
  BasinConfig one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = basin_sample(fixture("logistic4"), 16, 9, one);
  const auto b = basin_sample(fixture("logistic4"), 16, 9, many);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].cover.cells == b[i].cover.cells);
}

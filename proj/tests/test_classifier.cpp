#include <doctest.h>

#include <cmath>

#include "pwdyn/classifier.hpp"
#include "pwdyn/error.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

namespace {

double fraction_sum(const Classification& c) {
  double s = c.unclassified_fraction;
  for (const auto& r : c.reports) s += r.basin_fraction;
  return s;
}

// Every cell mapped forward stays inside the cover inflated by res.
bool forward_invariant(const PiecewiseMap& m, const IntervalCover& c) {
  const double res = c.resolution;
  for (const Interval& cell : c.cells)
    for (int k = 1; k < 200; ++k) {
      const double y = m.step(cell.lo + cell.length() * k / 200.0);
      if (std::isnan(y)) continue;
      if (!(c.contains(y) || c.contains(y - res) || c.contains(y + res))) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("logistic 3.2: one periodic-like attractor") {
  ClassifyConfig cfg;
  cfg.length = 10000;
  const auto oracle = pwtest::logistic_two_cycle(3.2);
  const Classification c = classify_attractors(fixture("logistic3.2"), cfg);
  REQUIRE(c.reports.size() == 1);
  const AttractorReport& r = c.reports[0];
  CHECK(r.kind == AttractorKind::PeriodicLike);
  REQUIRE(r.periodic.has_value());
  CHECK(r.periodic->period == 2);
  CHECK(r.periodic->orbit[0] == doctest::Approx(oracle.lo).epsilon(1e-6));
  CHECK(r.basin_fraction >= 0.99);
  CHECK(fraction_sum(c) == doctest::Approx(1.0));
}

TEST_CASE("tent: one interval cycle") {
  const PiecewiseMap m = fixture("tent");
  const Classification c = classify_attractors(m);
  REQUIRE(c.reports.size() == 1);
  const AttractorReport& r = c.reports[0];
  CHECK(r.kind == AttractorKind::IntervalCycle);
  REQUIRE(r.intervals.size() == 1);
  CHECK(r.intervals[0].lo <= 1e-3);
  CHECK(r.intervals[0].hi >= 1.0 - 1e-3);
  CHECK(r.basin_fraction >= 0.99);
  CHECK(c.reports.size() <= c.report_bound);
  CHECK(forward_invariant(m, r.cover));
}

TEST_CASE("Feigenbaum logistic: one Cantor attractor") {
  const PiecewiseMap m = fixture("logistic_feigenbaum");
  const Classification c = classify_attractors(m);
  REQUIRE(c.reports.size() == 1);
  const AttractorReport& r = c.reports[0];
  CHECK(r.kind == AttractorKind::Cantor);
  REQUIRE(r.matched.size() == 2);
  CHECK(r.matched[0] == LateralPoint{0.5, Side::Left});
  CHECK(r.matched[1] == LateralPoint{0.5, Side::Right});
  CHECK(r.cover.max_cell() <= 1e-2);
  // Whole cells are not invariant (each holds gaps of the Cantor set), but a
  // fresh tail of the critical orbit must stay in the cover.
  double y = 0.5 + 1e-9;
  std::size_t outside = 0;
  for (int i = 0; i < 200000; ++i) {
    y = m.step(y);
    if (i >= 100000 && !(r.cover.contains(y) || r.cover.contains(y - 1e-3) || r.cover.contains(y + 1e-3))) ++outside;
  }
  CHECK(outside == 0);
}

TEST_CASE("classification is deterministic") {
  ClassifyConfig cfg;
  cfg.samples = 100;
  cfg.length = 10000;
  const Classification a = classify_attractors(fixture("logistic4"), cfg);
  cfg.threads = 3;
  const Classification b = classify_attractors(fixture("logistic4"), cfg);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].sample_indices == b.reports[i].sample_indices);
    CHECK(a.reports[i].cover.cells == b.reports[i].cover.cells);
  }
}

TEST_CASE("classify preconditions") {
  ClassifyConfig cfg;
  cfg.samples = 10;
  CHECK_THROWS_AS(classify_attractors(fixture("tent"), cfg), PreconditionError);
}

TEST_CASE("critical_order") {
  const CriticalOrder t = critical_order(fixture("tent"), 10000, 1e-3);
  CHECK(t.precedes.empty());
  CHECK(t.maximal.size() == 2);
  CHECK(critical_order(fixture("logistic4"), 10000, 1e-3).precedes.empty());

  const CriticalOrder f = critical_order(fixture("logistic_feigenbaum"), 100000, 1e-3);
  CHECK(f.precedes.empty());
  CHECK(f.in_omega[0][0]);
  CHECK(f.in_omega[1][1]);
  CHECK_THROWS_AS(critical_order(fixture("tent"), 100, 1e-3), PreconditionError);
}

TEST_CASE("recurrence_check") {
  CHECK_FALSE(recurrence_check(fixture("logistic4"), {0.5, Side::Left}, 100000, 1e-3));
  CHECK(recurrence_check(fixture("logistic_feigenbaum"), {0.5, Side::Left}, 100000, 1e-3));
  CHECK(recurrence_check(fixture("logistic_feigenbaum"), {0.5, Side::Right}, 100000, 1e-3));
  // lateral value equal to its own point
  CHECK(recurrence_check(fixture("logistic2"), {0.5, Side::Left}, 10000, 1e-3));
  CHECK_THROWS_AS(recurrence_check(fixture("tent"), {0.5, Side::Left}, 100, 1e-3), PreconditionError);
}

TEST_CASE("match_omega") {
  const PiecewiseMap tent = fixture("tent");
  const IntervalCover full{1e-3, {{0.0, 1.0}}};
  const OmegaMatch t = match_omega(full, tent);
  CHECK_FALSE(t.accepted);
  CHECK(t.symmetric_difference > 0.5);

  const IntervalCover away{1e-3, {{0.1, 0.2}}};
  const OmegaMatch a = match_omega(away, tent);
  CHECK_FALSE(a.accepted);
  CHECK(a.candidates == 0);

  const PiecewiseMap f = fixture("logistic_feigenbaum");
  const IntervalCover c = critical_orbit_cover(f, {0.5, Side::Left}, 1000000, 1e-3);
  const OmegaMatch m = match_omega(c, f);
  CHECK(m.accepted);
  CHECK(m.V.size() == 2);
  CHECK_THROWS_AS(match_omega(IntervalCover{1e-3, {}}, tent), PreconditionError);
}

TEST_CASE("hausdorff distance of intervals") {
  CHECK(hausdorff({0, 1}, {0, 1}) == 0.0);
  CHECK(hausdorff({0, 1}, {0.1, 0.95}) == doctest::Approx(0.1));
}

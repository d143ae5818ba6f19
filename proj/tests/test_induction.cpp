#include <doctest.h>

#include <cmath>

#include "pwdyn/error.hpp"
#include "pwdyn/induction.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

TEST_CASE("is_nice") {
  const PiecewiseMap tent = fixture("tent");
  // 2/5 -> 4/5 -> 2/5 exactly: the endpoint orbits stay on the boundary.
  pwtest::Rational r{2, 5};
  for (int i = 0; i < 10; ++i) {
    r = pwtest::tent_exact(r);
    CHECK((r.value() <= 0.4 || r.value() >= 0.6));
  }
  CHECK(is_nice(tent, {0.4, 0.6}, 100));
  // 0.45 -> 0.9 -> 0.2 -> 0.4 enters (0.3, 0.45).
  CHECK_FALSE(is_nice(tent, {0.3, 0.45}, 100));
  CHECK(is_nice(tent, {0.3, 0.45}, 0));
}

TEST_CASE("find_nice_interval") {
  const PiecewiseMap tent = fixture("tent");
  const auto J = find_nice_interval(tent, 2.0 / 3.0, 0.1, 200);
  REQUIRE(J.has_value());
  CHECK(J->contains_open(2.0 / 3.0));
  CHECK(is_nice(tent, *J, 200));
  CHECK_THROWS_AS(find_nice_interval(tent, 2.0 / 3.0, 0.0, 200), PreconditionError);

  const PiecewiseMap l4 = fixture("logistic4");
  if (const auto K = find_nice_interval(l4, 0.3, 0.05, 500)) CHECK(is_nice(l4, *K, 500));
}

TEST_CASE("first_return on the doubling map reproduces the dyadic branches") {
  const InducedMap R = first_return(fixture("doubling"), {0.0, 0.5}, 20);
  REQUIRE(!R.branches.empty());
  CHECK(R.full_markov());
  for (const InducedBranch& b : R.branches) {
    // return time t on [1/2 - 2^-t, 1/2 - 2^-(t+1))
    const double t = static_cast<double>(b.time);
    CHECK(b.domain.lo == doctest::Approx(0.5 - std::pow(2.0, -t)).epsilon(1e-12));
    CHECK(b.domain.hi == doctest::Approx(0.5 - std::pow(2.0, -t - 1)).epsilon(1e-12));
    CHECK(std::fabs(b.image_ratio - 1.0) <= 1e-6);
    CHECK(b.min_abs_deriv == doctest::Approx(std::pow(2.0, t)));
  }
  CHECK(R.coverage >= 0.95);
  CHECK(measure_distortion(R) == 1.0);
}

TEST_CASE("first_return on the tent around 2/3") {
  const PiecewiseMap tent = fixture("tent");
  const auto J = find_nice_interval(tent, 2.0 / 3.0, 0.1, 200);
  REQUIRE(J.has_value());
  const InducedMap R = first_return(tent, *J, 50);
  CHECK(R.full_markov());
  CHECK(R.probe_failures == 0);
  CHECK(R.coverage >= 0.95);
  for (const InducedBranch& b : R.branches) {
    CHECK(std::fabs(b.image_ratio - 1.0) <= 1e-6);
    CHECK(b.min_abs_deriv == doctest::Approx(std::pow(2.0, static_cast<double>(b.time))));
  }
}

TEST_CASE("a non-nice base shows Markov failures") {
  InductionConfig cfg;
  cfg.target_uncovered = 1e-2;
  const InducedMap R = first_return(fixture("tent"), {0.3, 0.45}, 30, cfg);
  CHECK(R.markov_failures > 0);
  CHECK_FALSE(R.full_markov());
}

TEST_CASE("first_entry") {
  const InducedMap E = first_entry(fixture("doubling"), {0.0, 1.0}, {0.25, 0.5}, 10);
  double total = 0.0;
  for (const InducedBranch& b : E.branches) {
    CHECK(b.time <= 10);
    CHECK(std::fabs(b.image_ratio - 1.0) <= 1e-6);
    total += b.domain.length();
  }
  CHECK(total >= 1.0 - std::pow(2.0, -10) * 4);

  const InducedMap T = first_entry(fixture("tent"), {0.0, 1.0}, {0.9, 1.0}, 1);
  for (const InducedBranch& b : T.branches) CHECK(std::fabs(b.image_ratio - 1.0) <= 1e-6);

  const InducedMap I = first_entry(fixture("tent"), {0.2, 0.3}, {0.2, 0.3}, 5);
  REQUIRE(I.branches.size() == 1);
  CHECK(I.branches[0].time == 0);
  CHECK(I.branches[0].domain == Interval{0.2, 0.3});
}

TEST_CASE("distortion bounds") {
  const PiecewiseMap tent = fixture("tent");
  CHECK(measured_distortion(tent, {0.12, 0.18}, 2, 100) == 1.0);
  CHECK(distortion_bound(tent, {0.1, 0.2}, {0.12, 0.18}, 2) >= 1.0);

  const PiecewiseMap l4 = fixture("logistic4");
  // f^3 folds (0.1, 0.2): f^2 already crosses 1/2.
  CHECK_THROWS_AS(distortion_bound(l4, {0.1, 0.2}, {0.12, 0.18}, 3), NotDiffeomorphic);
  const double bound = distortion_bound(l4, {0.1, 0.2}, {0.12, 0.18}, 1);
  // probe-pair oracle straight from Df = 4 - 8x
  double lo = INFINITY, hi = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double d = std::fabs(4.0 - 8.0 * (0.12 + 0.06 * (i + 0.5) / 100.0));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(hi / lo <= bound);
  CHECK(measured_distortion(l4, {0.12, 0.18}, 1, 100) == doctest::Approx(hi / lo).epsilon(1e-9));
}

TEST_CASE("refine_partition on the doubling return map") {
  InductionConfig cfg;
  cfg.target_uncovered = 1e-2;
  const InducedMap R = first_return(fixture("doubling"), {0.0, 0.5}, 50, cfg);
  const Partition p0 = refine_partition(R, 0);
  REQUIRE(p0.cells.size() == R.branches.size());
  for (std::size_t i = 0; i < R.branches.size(); ++i) CHECK(p0.cells[i].domain == R.branches[i].domain);
  double prev = p0.max_diameter.back();
  for (std::size_t n = 1; n <= 3; ++n) {
    const Partition p = refine_partition(R, n);
    CHECK(p.max_diameter.back() == doctest::Approx(prev / 2.0));
    prev = p.max_diameter.back();
    for (const PartitionCell& c : p.cells) CHECK(c.distortion == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(refine_partition(R, 9), PreconditionError);
}

TEST_CASE("induced_orbit_cover fills the base") {
  const InducedMap R = first_return(fixture("doubling"), {0.0, 0.5}, 50);
  const IntervalCover c = induced_orbit_cover(R, 0.1234, 1000, 200000, 1e-3, {1e-13, 3});
  CHECK(c.measure() >= 0.5 - 2e-3);
}

TEST_CASE("logistic-4 return-map distortion shrinks with the base") {
  const PiecewiseMap m = fixture("logistic4");
  InductionConfig cfg;
  cfg.target_uncovered = 1e-2;
  double prev = INFINITY;
  for (double len : {0.1, 0.05, 0.025}) {
    const auto J = find_nice_interval(m, 0.75, len / 2.0, 500);
    REQUIRE(J.has_value());
    const double d = measure_distortion(first_return(m, *J, 50, cfg));
    CHECK(d >= 1.0);
    CHECK(d < prev);
    prev = d;
  }
}

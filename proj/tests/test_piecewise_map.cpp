#include <doctest.h>

#include <cmath>

#include "pwdyn/error.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

TEST_CASE("exceptional set and lateral values") {
  const PiecewiseMap tent = fixture("tent");
  REQUIRE(tent.exceptional() == std::vector<double>{0.5});
  REQUIRE(tent.lateral_values().size() == 2);
  CHECK(tent.lateral_values()[0].value == 1.0);
  CHECK(tent.lateral_values()[1].value == 1.0);

  const PiecewiseMap dbl = fixture("doubling");
  CHECK(dbl.lateral_values()[0].at == LateralPoint{0.5, Side::Left});
  CHECK(dbl.lateral_values()[0].value == 1.0);
  CHECK(dbl.lateral_values()[1].value == 0.0);

  const PiecewiseMap l4 = fixture("logistic4");
  for (const auto& v : l4.lateral_values()) CHECK(v.value == 1.0);
}

TEST_CASE("eval and deriv") {
  const PiecewiseMap tent = fixture("tent");
  CHECK(tent.eval(0.25) == 0.5);
  CHECK_THROWS_AS(tent.eval(0.5), ExceptionalPoint);
  CHECK_THROWS_AS(tent.eval(1.5), OutOfRange);
  CHECK(tent.deriv(0.25) == 2.0);
  CHECK(tent.deriv(0.75) == -2.0);
  CHECK(fixture("doubling").eval(0.75) == 0.5);
  CHECK(fixture("logistic4").deriv(0.25) == doctest::Approx(2.0));
  CHECK(fixture("logistic4").deriv2(0.25) == doctest::Approx(-8.0));
  CHECK(std::isnan(tent.step(0.5)));
}

TEST_CASE("eval_lateral") {
  const PiecewiseMap dbl = fixture("doubling");
  CHECK(dbl.eval_lateral({0.5, Side::Left}) == 1.0);
  CHECK(dbl.eval_lateral({0.5, Side::Right}) == 0.0);
  CHECK(fixture("tent").eval_lateral({0.5, Side::Left}) == 1.0);
  CHECK_THROWS_AS(dbl.eval_lateral({0.0, Side::Left}), PreconditionError);
}

TEST_CASE("lateral values are limits of nearby evaluations") {
  for (const char* name : {"tent", "doubling", "logistic4", "gap_map"}) {
    const PiecewiseMap m = fixture(name);
    for (const LateralValue& v : m.lateral_values()) {
      const int s = v.at.side == Side::Left ? -1 : 1;
      double prev = INFINITY;
      for (double e : {1e-2, 1e-4, 1e-6}) {
        const double d = std::fabs(m.eval(v.at.point + s * e) - v.value);
        CHECK(d <= prev);
        prev = d;
      }
    }
  }
}

TEST_CASE("build rejects broken tilings") {
  CHECK_THROWS_AS(pwtest::make({{{0, 0.4}, "2*x"}, {{0.5, 1}, "2-2*x"}}), MapError);
  CHECK_THROWS_AS(pwtest::make({{{0, 0.6}, "x"}, {{0.5, 1}, "x"}}), MapError);
  CHECK_THROWS_AS(pwtest::make({{{0, 1}, "2*x"}}), MapError);           // leaves [0,1]
  CHECK_THROWS_AS(pwtest::make({{{0, 1}, "0.5 + 0*x"}}), MapError);     // flat
  CHECK_THROWS_AS(pwtest::make({{{0, 0.5}, "2*x"}, {{0.5, 1}, "2-2*x"}}, {0.3}), MapError);
  // A regular joint removes the point from C_f.
  const PiecewiseMap id2 = pwtest::make({{{0, 0.5}, "x"}, {{0.5, 1}, "x"}}, {0.5});
  CHECK(id2.exceptional().empty());
  CHECK(id2.eval(0.5) == 0.5);
}

TEST_CASE("deriv_product") {
  const PiecewiseMap tent = fixture("tent");
  const DerivProduct t = deriv_product(tent, 0.3, 10);
  CHECK(t.log_abs == doctest::Approx(10 * std::log(2.0)));
  const DerivProduct d = deriv_product(fixture("doubling"), 0.3, 20);
  CHECK(d.log_abs == doctest::Approx(20 * std::log(2.0)));
  CHECK(d.sign == 1);
  const DerivProduct z = deriv_product(tent, 0.3, 0);
  CHECK(z.log_abs == 0.0);
  CHECK(z.sign == 1);
  CHECK_THROWS_AS(deriv_product(tent, 0.25, 3), OrbitHitsExceptional);  // 0.25 -> 0.5
  // 0.75 is on the decreasing branch: one sign flip.
  CHECK(deriv_product(tent, 0.75, 1).sign == -1);
}

TEST_CASE("validate_nonflat orders") {
  const ValidationReport t = validate_nonflat(fixture("tent"), 1000);
  REQUIRE(t.branches.size() == 2);
  CHECK(t.branches[0].min_abs_deriv == doctest::Approx(2.0));
  REQUIRE(t.orders.size() == 1);
  CHECK(t.orders[0].left == doctest::Approx(1.0).epsilon(0.05));
  CHECK(t.orders[0].right == doctest::Approx(1.0).epsilon(0.05));
  CHECK(t.ok());

  const ValidationReport l = validate_nonflat(fixture("logistic4"), 1000);
  CHECK(l.orders[0].left == doctest::Approx(2.0).epsilon(0.05));
  CHECK(l.orders[0].right == doctest::Approx(2.0).epsilon(0.05));

  const PiecewiseMap sp = pwtest::make({{{0, 0.5}, "x"}, {{0.5, 1}, "0.5 + spow(x-0.5, 2)"}});
  const ValidationReport s = validate_nonflat(sp, 1000);
  // independent slope fit straight from the expression
  const double oracle = pwtest::loglog_slope([](double x) { return 0.5 + (x - 0.5) * (x - 0.5); }, 0.5, 0.5, 1);
  CHECK(oracle == doctest::Approx(2.0).epsilon(1e-3));  // rounding near 0.5 at the smallest scales
  CHECK(s.orders[0].right == doctest::Approx(2.0).epsilon(0.05));
  CHECK(s.orders[0].left == doctest::Approx(1.0).epsilon(0.05));

  CHECK_THROWS_AS(validate_nonflat(fixture("tent"), 10), PreconditionError);
}

TEST_CASE("extend_map") {
  const PiecewiseMap tent = fixture("tent");
  const PiecewiseMap ext = extend_map(tent);
  CHECK(ext.ambient() == Interval{-1, 2});
  CHECK(ext.exceptional() == tent.exceptional());
  for (double x : {0.1, 0.3, 0.7, 0.9}) CHECK(ext.eval(x) == tent.eval(x));
  // C^1 across the old endpoints
  for (double c : {0.0, 1.0}) {
    const double dl = ext.deriv(c - 1e-9), dr = ext.deriv(c + 1e-9);
    CHECK(dl == doctest::Approx(dr).epsilon(1e-6));
  }
  // Each collar point tends to the outer endpoints or enters [0,1].
  for (double x : {-0.9, -0.5, -0.1, 1.1, 1.5, 1.9}) {
    double y = x;
    bool settled = false;
    for (int i = 0; i < 200 && !settled; ++i) {
      y = ext.eval(y);
      settled = (y >= 0.0 && y <= 1.0) || std::fabs(y + 1.0) < 1e-9 || std::fabs(y - 2.0) < 1e-9;
    }
    CHECK(settled);
  }
  // Monotone collars keep the orientation of f at the old endpoint: tent
  // decreases at 1, so 2 goes to -1. {-1, 2} is still invariant.
  CHECK(ext.eval(-1.0) == doctest::Approx(-1.0));
  CHECK(ext.eval(2.0) == doctest::Approx(-1.0));
  const PiecewiseMap ed = extend_map(fixture("doubling"));
  CHECK(ed.eval(2.0) == doctest::Approx(2.0));
  CHECK(ed.eval(-1.0) == doctest::Approx(-1.0));
}

#include <doctest.h>

#include <cmath>

#include "pwdyn/error.hpp"
#include "pwdyn/mane.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

TEST_CASE("logistic 4 certificate") {
  ManeConfig cfg;
  cfg.samples = 300;
  const ManeCertificate c = mane_certificate(fixture("logistic4"), {{0.4, 0.6}}, cfg);
  CHECK(c.valid);
  CHECK(c.lambda > 1.0);
  CHECK(c.C > 0.0);
  CHECK(c.periodic_violations.empty());
  CHECK(replay_certificate(fixture("logistic4"), c, 777, 300) >= 0.99);
}

TEST_CASE("doubling certificate has lambda 2 and C 1") {
  ManeConfig cfg;
  cfg.samples = 100;
  const ManeCertificate c = mane_certificate(fixture("doubling"), {{0.5 - 1e-6, 0.5 + 1e-6}}, cfg);
  CHECK(c.valid);
  CHECK(std::fabs(c.lambda - 2.0) <= 1e-9);
  CHECK(std::fabs(c.C - 1.0) <= 1e-9);
}

TEST_CASE("logistic 3.2 certificate is invalid because of the 2-cycle") {
  const auto oracle = pwtest::logistic_two_cycle(3.2);
  ManeConfig cfg;
  cfg.samples = 100;
  const ManeCertificate c = mane_certificate(fixture("logistic3.2"), {{0.4, 0.6}}, cfg);
  CHECK_FALSE(c.valid);
  REQUIRE(c.periodic_violations.size() == 1);
  CHECK(c.periodic_violations[0].point == doctest::Approx(oracle.hi).epsilon(1e-9));
  CHECK(c.periodic_violations[0].multiplier == doctest::Approx(oracle.multiplier).epsilon(1e-6));
}

TEST_CASE("U must cover C_f") {
  CHECK_THROWS_AS(mane_certificate(fixture("tent"), {{0.6, 0.7}}), UNotCovering);
}

TEST_CASE("enlarging U keeps a valid certificate valid") {
  ManeConfig cfg;
  cfg.samples = 200;
  const auto narrow = mane_certificate(fixture("logistic4"), {{0.4, 0.6}}, cfg);
  const auto wide = mane_certificate(fixture("logistic4"), {{0.35, 0.65}}, cfg);
  CHECK(narrow.valid);
  CHECK(wide.valid);
  CHECK(wide.segments <= narrow.segments);
}

TEST_CASE("growth_test") {
  const PiecewiseMap tent = fixture("tent");
  const GrowthRecord a = growth_test(tent, 0.3141, {{0.499, 0.501}}, 200);
  CHECK(a.kind != GrowthKind::Bounded);
  if (a.kind == GrowthKind::Growth) CHECK(a.steps == 20);

  const GrowthRecord b = growth_test(tent, 2.0 / 3.0, {{0.4999, 0.5001}}, 200);
  CHECK(b.kind == GrowthKind::Growth);
  CHECK(b.steps == 20);  // 2^20 > 1e6 > 2^19

  const GrowthRecord c = growth_test(fixture("logistic3.2"), 0.3, {{0.5 - 1e-9, 0.5 + 1e-9}}, 10000);
  CHECK(c.kind == GrowthKind::Bounded);
  CHECK(c.max_abs_deriv < 1e6);

  CHECK_THROWS_AS(growth_test(tent, 0.5, {{0.4, 0.6}}, 10), PreconditionError);
}

#include <doctest.h>

#include <cmath>

#include "pwdyn/induction.hpp"
#include "support.hpp"

using namespace pwdyn;
using pwtest::fixture;

TEST_CASE("doubling return map is uniformly expanding") {
  const PiecewiseMap m = fixture("doubling");
  const InducedMap R = first_return(m, {0.0, 0.5}, 50);
  const ExpansionReport e = expansion_analysis(R, m);
  CHECK(e.mode == ExpansionMode::UniformlyExpanding);
  CHECK(e.min_expansion == doctest::Approx(2.0));
  CHECK(e.epsilon == 0.0);
  CHECK(e.applicable);
  CHECK(e.valid);
}

TEST_CASE("tent return map around 2/3 is uniformly expanding") {
  const PiecewiseMap m = fixture("tent");
  const auto J = find_nice_interval(m, 2.0 / 3.0, 0.1, 200);
  REQUIRE(J.has_value());
  const InducedMap R = first_return(m, *J, 50);
  const ExpansionReport e = expansion_analysis(R, m);
  CHECK(e.mode == ExpansionMode::UniformlyExpanding);
  std::size_t tmin = 1000;
  for (const auto& b : R.branches) tmin = std::min(tmin, b.time);
  CHECK(e.min_expansion >= std::pow(2.0, static_cast<double>(tmin)) * (1 - 1e-12));
  CHECK(e.valid);
}

TEST_CASE("neutral fixed point engages the neutral core") {
  const PiecewiseMap m = fixture("neutral_core");
  InductionConfig cfg;
  cfg.target_uncovered = 1e-8;
  const InducedMap R = first_return(m, {0.25, 0.75}, 50, cfg);
  CHECK(R.full_markov());
  const ExpansionReport e = expansion_analysis(R, m);
  CHECK(e.mode == ExpansionMode::NeutralCore);
  CHECK(e.applicable);
  CHECK(e.min_expansion > 3.0);
  CHECK(e.valid);
  REQUIRE(e.Ip.has_value());
  CHECK(e.Ip->contains_open(0.5));
  REQUIRE(e.flanks.size() == 2);
  for (const FlankReport& f : e.flanks) {
    CHECK(f.entry_probes > 0);
    CHECK(f.entry_bound_holds);
  }
}

TEST_CASE("entry-map lower bound on the one-branch model") {
  const ToyEntryCheck t = toy_entry_check(0.5, 0.0, 0.1);
  CHECK(t.branches > 10);
  CHECK(t.probes > 0);
  CHECK(t.min_deriv >= t.bound);
  CHECK(t.holds);
}

TEST_CASE("expansion report for a logistic-4 return map") {
  // logistic 4: the critical orbit is 1, 0, 0, ... and J around 0.3 is nice.
  const PiecewiseMap m = fixture("logistic4");
  const auto J = find_nice_interval(m, 0.3, 0.05, 500);
  REQUIRE(J.has_value());
  InductionConfig cfg;
  cfg.target_uncovered = 1e-2;
  const InducedMap R = first_return(m, *J, 50, cfg);
  const ExpansionReport e = expansion_analysis(R, m);
  CHECK(e.distortion >= 1.0);
  CHECK(e.K > 0.0);
  CHECK(e.T.contains(*J));
}

#pragma once

// Sampling-based attractor classification: attracting periodic-like orbits,
// cycles of intervals, and Cantor sets matched to closures of lateral
// critical orbits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pwdyn/orbit.hpp"

namespace pwdyn {

enum class AttractorKind { PeriodicLike, IntervalCycle, Cantor, Unresolved };
const char* to_string(AttractorKind k) noexcept;

struct PeriodicAttractor {
  std::vector<double> orbit;
  std::size_t period = 0;
  double multiplier = 0.0;
  std::optional<LateralPoint> lateral;
};

struct AttractorReport {
  AttractorKind kind = AttractorKind::Unresolved;
  IntervalCover cover;
  double basin_fraction = 0.0;
  std::vector<std::size_t> sample_indices;

  std::optional<PeriodicAttractor> periodic;  // PeriodicLike
  std::vector<Interval> intervals;             // IntervalCycle
  std::size_t cycle_period = 0;
  std::vector<LateralPoint> matched;           // Cantor
  std::vector<bool> recurrent;
  double match_distance = 0.0;                 // symmetric difference of the best candidate
  std::string note;                            // why a cluster stayed unresolved
};

struct ClassifyConfig {
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 1000;
  std::size_t length = 100000;
  double resolution = 1e-3;
  double noise = 1e-13;
  std::size_t critical_length = 1'000'000;  // orbit length for critical-orbit covers
  std::size_t recurrence_length = 100000;
  unsigned threads = 0;
};

struct Classification {
  std::vector<AttractorReport> reports;
  std::size_t samples = 0;
  double unclassified_fraction = 0.0;  // samples whose orbit hit C_f exactly
  std::size_t report_bound = 0;        // 2^(2|C_f|) - 1 + periodic-like reports
};

Classification classify_attractors(const PiecewiseMap& m, const ClassifyConfig& cfg = {});

struct CriticalOrder {
  std::vector<LateralValue> values;
  std::vector<std::vector<bool>> in_omega;  // [a][b]: value a lies in omega(value b)
  std::vector<std::pair<std::size_t, std::size_t>> precedes;  // (a, b): a < b strictly
  std::vector<std::size_t> maximal;
};

CriticalOrder critical_order(const PiecewiseMap& m, std::size_t horizon, double resolution);

bool recurrence_check(const PiecewiseMap& m, const LateralPoint& v, std::size_t length, double eps);

struct OmegaMatch {
  bool accepted = false;
  std::vector<LateralPoint> V;
  double symmetric_difference = 0.0;  // of the best candidate
  std::size_t candidates = 0;
};

// Cover of the closed forward orbit of the lateral value at v.
IntervalCover critical_orbit_cover(const PiecewiseMap& m, const LateralPoint& v, std::size_t length,
                                   double resolution);

OmegaMatch match_omega(const IntervalCover& cover, const PiecewiseMap& m, const ClassifyConfig& cfg = {});

// Hausdorff distance between two closed intervals.
double hausdorff(const Interval& a, const Interval& b) noexcept;

}  // namespace pwdyn

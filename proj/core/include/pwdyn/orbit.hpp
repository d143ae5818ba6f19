#pragma once

// Orbits, finite-resolution omega-limit covers, periodic and periodic-like
// points, and seeded basin sampling.

#include <cstdint>
#include <optional>
#include <vector>

#include "pwdyn/piecewise_map.hpp"

namespace pwdyn {

struct OrbitSegment {
  double start = 0.0;
  std::vector<double> iterates;          // f(x), f^2(x), ...
  std::vector<double> log_deriv_prefix;  // [k] = sum_{i<k} log|Df(f^i x)|, size iterates+1
  std::optional<std::size_t> terminated_at_exceptional;  // i with f^i(x) in C_f
};

OrbitSegment orbit(const PiecewiseMap& m, double x, std::size_t n);

// Union of closed cells on a grid of width `resolution` anchored at the
// ambient lower end.
struct IntervalCover {
  double resolution = 0.0;
  std::vector<Interval> cells;  // sorted, disjoint

  double measure() const noexcept;
  bool contains(double x) const noexcept;
  double max_cell() const noexcept;
  bool empty() const noexcept { return cells.empty(); }
};

// Lebesgue measure of the symmetric difference.
double symmetric_difference(const IntervalCover& a, const IntervalCover& b);
IntervalCover cover_union(const IntervalCover& a, const IntervalCover& b);
// Cells of `small` that are not inside `big` inflated by `slack`, measured.
double uncovered_measure(const IntervalCover& small, const IntervalCover& big, double slack);

// Tiny seeded jitter added after every step. Binary64 orbits of maps with
// dyadic slopes (tent, doubling) collapse onto 0 after ~55 steps because each
// step shifts out one mantissa bit; a jitter far below any resolution used
// for covers restores typical behaviour. amplitude 0 means exact iteration.
struct OrbitNoise {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

// Applies one step of f plus jitter, reflected into the ambient interval and
// nudged off C_f. Returns NaN when the exact step is undefined.
class NoisyStepper {
public:
  NoisyStepper(const PiecewiseMap& m, OrbitNoise noise) noexcept;
  double operator()(double x) noexcept;

private:
  const PiecewiseMap* m_;
  double amp_;
  std::uint64_t state_;
};

IntervalCover omega_cover(const PiecewiseMap& m, double x, std::size_t burn_in, std::size_t length,
                          double resolution, OrbitNoise noise = {});

struct CoverBuilder {
  CoverBuilder(const Interval& ambient, double resolution);
  void add(double y) noexcept;
  IntervalCover finish() const;

  Interval ambient;
  double resolution;
  std::vector<unsigned char> bins;
};

struct PeriodicLike {
  LateralPoint point;
  std::size_t period = 0;
  double lateral_multiplier = 0.0;
  bool attracting = false;
};

std::optional<PeriodicLike> detect_periodic_like(const PiecewiseMap& m, const LateralPoint& p,
                                                 std::size_t l_max = 64, double tol = 1e-9);

struct PeriodicPoint {
  double point = 0.0;
  std::size_t period = 0;
  double multiplier = 0.0;  // |Df^period(point)|
};

// Sorted by point. Boundary fixed points count.
std::vector<PeriodicPoint> find_periodic_points(const PiecewiseMap& m, std::size_t period_max, double tol = 1e-9);

// Orbit of a periodic point, in iteration order, starting at `p.point`.
std::vector<double> periodic_orbit(const PiecewiseMap& m, const PeriodicPoint& p);

struct BasinConfig {
  std::size_t burn_in = 1000;
  std::size_t length = 10000;
  double resolution = 1e-3;
  double noise = 1e-13;          // jitter amplitude, see OrbitNoise
  double periodic_tol = 1e-7;    // tail match tolerance
  std::size_t max_period = 64;
  unsigned threads = 0;
};

struct TailMatch {
  std::vector<double> orbit;  // limit cycle, starting at its smallest point
  std::size_t period = 0;
  double multiplier = 0.0;
  // Set when the limit sits on C_f: side from which the orbit approaches it.
  std::optional<LateralPoint> lateral;
};

struct RawPointRecord {
  std::size_t index = 0;
  double x0 = 0.0;
  IntervalCover cover;
  std::optional<TailMatch> matched;
  double min_dist_to_exceptional = 0.0;  // over the recorded tail
  std::optional<std::size_t> terminated_at_exceptional;
};

// Starting point of sample i for a seeded batch (uniform on the ambient interval).
double sample_point(const PiecewiseMap& m, std::uint64_t seed, std::size_t index);

std::vector<RawPointRecord> basin_sample(const PiecewiseMap& m, std::size_t sample_count, std::uint64_t seed,
                                         const BasinConfig& cfg = {});

}  // namespace pwdyn

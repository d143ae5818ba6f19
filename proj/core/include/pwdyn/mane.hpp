#pragma once

// Uniform expansion certificates away from a neighbourhood U of C_f, and
// derivative growth tests along single orbits.

#include <cstdint>
#include <vector>

#include "pwdyn/orbit.hpp"

namespace pwdyn {

struct ManeConfig {
  std::size_t period_max = 8;
  std::size_t samples = 1000;
  std::size_t n_max = 200;
  std::uint64_t seed = 1;
  std::size_t orbit_factor = 4;  // each seeded orbit runs orbit_factor * n_max steps
  double noise = 1e-13;          // see OrbitNoise
  unsigned threads = 0;
};

struct ManeCertificate {
  std::vector<Interval> U;  // open
  std::size_t period_checked = 0;
  std::vector<PeriodicPoint> periodic_violations;
  double C = 0.0;
  double lambda = 0.0;
  std::size_t n_max = 0;
  std::size_t samples = 0;
  std::size_t segments = 0;        // (start, length) pairs tested
  std::size_t longest_segment = 0;
  std::size_t fit_min_length = 0;  // shortest n used to fit lambda
  bool valid = false;
};

ManeCertificate mane_certificate(const PiecewiseMap& m, const std::vector<Interval>& U, const ManeConfig& cfg = {});

// Fraction of fresh segments (different seed) with |Df^n| > C lambda^n.
double replay_certificate(const PiecewiseMap& m, const ManeCertificate& cert, std::uint64_t seed,
                          std::size_t samples, double noise = 1e-13);

enum class GrowthKind { Growth, Captured, Bounded };
const char* to_string(GrowthKind k) noexcept;

struct GrowthRecord {
  GrowthKind kind = GrowthKind::Bounded;
  double max_abs_deriv = 1.0;  // running max of |Df^n(x)|
  std::size_t steps = 0;       // n at which the decision was made
};

constexpr double kGrowthThreshold = 1e6;

GrowthRecord growth_test(const PiecewiseMap& m, double x, const std::vector<Interval>& avoid, std::size_t n_max);

}  // namespace pwdyn

#pragma once

// Fixture loading and independent reference computations used as oracles.
// Nothing here calls into the library's numerics except map construction.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "pwdyn/piecewise_map.hpp"
#include "pwdyn/serialize.hpp"

namespace pwtest {

inline std::string fixture_path(const std::string& name) { return std::string(PWDYN_FIXTURE_DIR) + "/" + name + ".json"; }

inline pwdyn::PiecewiseMap fixture(const std::string& name) {
  return pwdyn::build_map(pwdyn::load_map_spec(fixture_path(name)));
}

inline pwdyn::PiecewiseMap make(std::vector<pwdyn::BranchSpec> branches, std::vector<double> joints = {}) {
  pwdyn::MapSpec s;
  s.branches = std::move(branches);
  s.regular_joints = std::move(joints);
  return pwdyn::build_map(s);
}

inline pwdyn::PiecewiseMap logistic(double a) {
  char e[64];
  std::snprintf(e, sizeof e, "%.17g*x*(1-x)", a);
  return make({{{0, 0.5}, e}, {{0.5, 1}, e}});
}

// Exact rational orbits: x = p/q with q odd iterates exactly under the tent
// and doubling maps.
struct Rational {
  std::int64_t p, q;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};
inline Rational tent_exact(Rational r) { return 2 * r.p <= r.q ? Rational{2 * r.p, r.q} : Rational{2 * (r.q - r.p), r.q}; }
inline Rational doubling_exact(Rational r) { return 2 * r.p < r.q ? Rational{2 * r.p, r.q} : Rational{2 * r.p - r.q, r.q}; }

// Points of exact period n for the doubling map on [0,1), from the
// k/(2^n - 1) lattice with Moebius-style exclusion of smaller periods.
inline std::size_t doubling_exact_period_count(unsigned n) {
  auto fix = [](unsigned k) { return (std::size_t{1} << k) - 1; };  // period dividing k, x in [0,1)
  std::vector<std::size_t> exact(n + 1, 0);
  for (unsigned k = 1; k <= n; ++k) {
    std::size_t s = fix(k);
    for (unsigned d = 1; d < k; ++d)
      if (k % d == 0) s -= exact[d];
    exact[k] = s;
  }
  return exact[n];
}

// Logistic 2-cycle by the quadratic formula and its multiplier 4 + 2a - a^2.
struct TwoCycle {
  double lo, hi, multiplier;
};
inline TwoCycle logistic_two_cycle(double a) {
  const double s = std::sqrt((a + 1.0) * (a - 3.0));
  return {(a + 1.0 - s) / (2.0 * a), (a + 1.0 + s) / (2.0 * a), std::fabs(4.0 + 2.0 * a - a * a)};
}

// Central finite difference.
template <class F>
double central_diff(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Least-squares slope of log|f(c +- e) - v| against log e.
template <class F>
double loglog_slope(F&& f, double c, double v, int side) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = 3; k <= 7; ++k) {
    const double e = std::pow(10.0, -k);
    const double lx = std::log(e), ly = std::log(std::fabs(f(c + side * e) - v));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Plain bisection on a sign change.
template <class F>
double bisect(F&& f, double a, double b, int iters = 200) {
  double fa = f(a);
  for (int i = 0; i < iters; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace pwtest

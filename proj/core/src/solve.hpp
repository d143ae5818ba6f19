#pragma once

// Bracketed root finding for monotone functions (Illinois variant of regula
// falsi). Converges in a handful of steps on smooth branches and never leaves
// the bracket, so it is safe next to the exceptional set.

#include <cmath>

namespace pwdyn::detail {

// x in [a, b] with fn(x) ~= t, given ga = fn(a), gb = fn(b) bracketing t.
template <class Fn>
double solve_monotone(const Fn& fn, double a, double b, double ga, double gb, double t) {
  if (t == ga) return a;
  if (t == gb) return b;
  double fa = ga - t, fb = gb - t;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double mag = std::fmax(std::fabs(a), std::fabs(b));
    if (!(b - a > 4.0 * (std::nextafter(mag, 1e300) - mag))) break;
    double x = (fa * b - fb * a) / (fa - fb);
    // Fall back to bisection when the secant step stalls at an end.
    if (!(x > a && x < b) || it % 8 == 7) x = 0.5 * (a + b);
    if (x <= a || x >= b) break;
    const double fx = fn(x) - t;
    if (fx == 0.0) return x;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return std::fabs(fa) < std::fabs(fb) ? a : b;
}

}  // namespace pwdyn::detail

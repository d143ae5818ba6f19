#include "pwdyn/error.hpp"

#include <cstdio>

namespace pwdyn {

namespace {
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

ExceptionalPoint::ExceptionalPoint(double x)
    : Error("point " + fmt17(x) + " belongs to the exceptional set"), x_(x) {}

OutOfRange::OutOfRange(double x) : Error("point " + fmt17(x) + " lies outside the ambient interval") {}

OrbitHitsExceptional::OrbitHitsExceptional(std::size_t index)
    : Error("orbit hits the exceptional set at iterate " + std::to_string(index)), index_(index) {}

}  // namespace pwdyn

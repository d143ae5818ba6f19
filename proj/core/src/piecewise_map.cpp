#include "pwdyn/piecewise_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pwdyn/error.hpp"

namespace pwdyn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Grid used by build() to check images and derivative signs.
constexpr std::size_t kBuildGrid = 256;

}  // namespace

const char* to_string(Side s) noexcept { return s == Side::Left ? "left" : "right"; }

PiecewiseMap PiecewiseMap::build(const MapSpec& spec) {
  PiecewiseMap m;
  m.spec_ = spec;
  m.ambient_ = spec.ambient;
  const Interval amb = spec.ambient;
  if (!(std::isfinite(amb.lo) && std::isfinite(amb.hi) && amb.lo < amb.hi))
    throw MapError("ambient interval must satisfy lo < hi");
  if (spec.branches.empty()) throw MapError("map has no branches");

  auto sorted = spec.branches;
  std::sort(sorted.begin(), sorted.end(),
            [](const BranchSpec& a, const BranchSpec& b) { return a.domain.lo < b.domain.lo; });

  double cursor = amb.lo;
  for (const auto& b : sorted) {
    if (!(b.domain.lo < b.domain.hi)) throw MapError("empty branch domain at " + num(b.domain.lo));
    if (b.domain.lo != cursor) {
      throw MapError((b.domain.lo > cursor ? "tiling gap between " : "tiling overlap between ") + num(cursor) +
                     " and " + num(b.domain.lo));
    }
    cursor = b.domain.hi;
  }
  if (cursor != amb.hi) throw MapError("branches do not reach the ambient endpoint " + num(amb.hi));

  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) m.breaks_.push_back(sorted[i].domain.hi);
  for (double r : spec.regular_joints) {
    if (!std::binary_search(m.breaks_.begin(), m.breaks_.end(), r))
      throw MapError("regular joint " + num(r) + " is not an interior branch endpoint");
  }
  for (double b : m.breaks_) {
    if (std::find(spec.regular_joints.begin(), spec.regular_joints.end(), b) == spec.regular_joints.end())
      m.exceptional_.push_back(b);
  }

  const double tol = 1e-12 * amb.length();
  for (const auto& b : sorted) {
    Branch br;
    br.domain = b.domain;
    br.source = b.expr;
    br.f = parse(b.expr);
    br.df = differentiate(br.f);
    br.d2f = differentiate(br.df);
    br.cf = CompiledExpr(br.f);
    br.cdf = CompiledExpr(br.df);
    br.cd2f = CompiledExpr(br.d2f);

    for (std::size_t j = 0; j < kBuildGrid; ++j) {
      const double x = b.domain.lo + (static_cast<double>(j) + 0.5) * b.domain.length() / kBuildGrid;
      const double y = pwdyn::eval(br.f, x);
      if (y < amb.lo - tol || y > amb.hi + tol)
        throw MapError("branch `" + b.expr + "` maps grid point " + num(x) + " to " + num(y) +
                       ", outside the ambient interval");
      const double d = pwdyn::eval(br.df, x);
      if (d == 0.0 || !std::isfinite(d))
        throw MapError("branch `" + b.expr + "` has zero derivative at grid point " + num(x));
    }
    for (double x : {b.domain.lo, b.domain.hi}) {
      const double y = br.cf(x);
      if (!std::isfinite(y) || y < amb.lo - tol || y > amb.hi + tol)
        throw MapError("branch `" + b.expr + "` has closure value " + num(y) + " at " + num(x) +
                       " outside the ambient interval");
    }
    m.branches_.push_back(std::move(br));
  }

  for (double c : m.exceptional_) {
    m.lateral_values_.push_back({{c, Side::Left}, m.eval_lateral({c, Side::Left})});
    m.lateral_values_.push_back({{c, Side::Right}, m.eval_lateral({c, Side::Right})});
    m.orders_.push_back({c, fit_local_order(m, {c, Side::Left}), fit_local_order(m, {c, Side::Right})});
  }
  return m;
}

bool PiecewiseMap::is_exceptional(double x) const noexcept {
  return std::binary_search(exceptional_.begin(), exceptional_.end(), x);
}

std::size_t PiecewiseMap::find_branch(double x) const noexcept {
  if (!(x >= ambient_.lo && x <= ambient_.hi)) return npos;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  if (it != breaks_.begin() && *(it - 1) == x && is_exceptional(x)) return npos;
  return static_cast<std::size_t>(it - breaks_.begin());
}

std::size_t PiecewiseMap::branch_index(double x) const {
  if (!(x >= ambient_.lo && x <= ambient_.hi)) throw OutOfRange(x);
  const std::size_t i = find_branch(x);
  if (i == npos) throw ExceptionalPoint(x);
  return i;
}

double PiecewiseMap::eval(double x) const {
  const std::size_t i = branch_index(x);
  double y = branches_[i].cf(x);
  if (std::isnan(y)) y = pwdyn::eval(branches_[i].f, x);  // throws with the failing node
  return std::clamp(y, ambient_.lo, ambient_.hi);
}

double PiecewiseMap::deriv(double x) const {
  const std::size_t i = branch_index(x);
  const double d = branches_[i].cdf(x);
  return std::isnan(d) ? pwdyn::eval(branches_[i].df, x) : d;
}

double PiecewiseMap::deriv2(double x) const {
  const std::size_t i = branch_index(x);
  const double d = branches_[i].cd2f(x);
  return std::isnan(d) ? pwdyn::eval(branches_[i].d2f, x) : d;
}

namespace {

std::size_t lateral_branch(const PiecewiseMap& m, const LateralPoint& p) {
  const Interval& amb = m.ambient();
  if (p.side == Side::Left && !(p.point > amb.lo))
    throw PreconditionError("left-lateral point must lie above the ambient lower end");
  if (p.side == Side::Right && !(p.point < amb.hi))
    throw PreconditionError("right-lateral point must lie below the ambient upper end");
  if (!amb.contains_closed(p.point)) throw OutOfRange(p.point);
  const auto& br = m.branches();
  for (std::size_t i = 0; i < br.size(); ++i) {
    const Interval& d = br[i].domain;
    if (p.side == Side::Left ? (d.lo < p.point && p.point <= d.hi) : (d.lo <= p.point && p.point < d.hi)) return i;
  }
  throw OutOfRange(p.point);
}

}  // namespace

double PiecewiseMap::eval_lateral(const LateralPoint& p) const {
  const std::size_t i = lateral_branch(*this, p);
  double y = branches_[i].cf(p.point);
  if (std::isnan(y)) y = pwdyn::eval(branches_[i].f, p.point);
  return std::clamp(y, ambient_.lo, ambient_.hi);
}

double PiecewiseMap::deriv_lateral(const LateralPoint& p) const {
  const std::size_t i = lateral_branch(*this, p);
  const double d = branches_[i].cdf(p.point);
  return std::isnan(d) ? pwdyn::eval(branches_[i].df, p.point) : d;
}

double PiecewiseMap::eval_branch(std::size_t i, double x) const noexcept { return branches_[i].cf(x); }
double PiecewiseMap::deriv_branch(std::size_t i, double x) const noexcept { return branches_[i].cdf(x); }
double PiecewiseMap::deriv2_branch(std::size_t i, double x) const noexcept { return branches_[i].cd2f(x); }

double PiecewiseMap::step(double x) const noexcept {
  const std::size_t i = find_branch(x);
  if (i == npos) return kNaN;
  const double y = branches_[i].cf(x);
  if (std::isnan(y)) return kNaN;
  return std::clamp(y, ambient_.lo, ambient_.hi);
}

double PiecewiseMap::step(double x, double& dfx) const noexcept {
  const std::size_t i = find_branch(x);
  if (i == npos) {
    dfx = kNaN;
    return kNaN;
  }
  dfx = branches_[i].cdf(x);
  const double y = branches_[i].cf(x);
  if (std::isnan(y)) return kNaN;
  return std::clamp(y, ambient_.lo, ambient_.hi);
}

DerivProduct deriv_product(const PiecewiseMap& m, double x, std::size_t n) {
  DerivProduct out;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.is_exceptional(x)) throw OrbitHitsExceptional(i);
    const double d = m.deriv(x);
    out.log_abs += std::log(std::fabs(d));
    if (d < 0) out.sign = -out.sign;
    x = m.eval(x);
  }
  return out;
}

double fit_local_order(const PiecewiseMap& m, const LateralPoint& p) {
  const std::size_t i = lateral_branch(m, p);
  const auto& br = m.branches()[i];
  const double base = br.cf(p.point);
  const double scale = std::min(1e-3, 0.25 * br.domain.length());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  double eps = scale;
  for (int k = 0; k < 5; ++k, eps *= 0.1) {
    const double x = p.side == Side::Left ? p.point - eps : p.point + eps;
    const double d = std::fabs(br.cf(x) - base);
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const double lx = std::log(eps), ly = std::log(d);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::infinity();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ValidationReport validate_nonflat(const PiecewiseMap& m, std::size_t grid_size) {
  if (grid_size < 100) throw PreconditionError("validate_nonflat: grid_size must be >= 100");
  ValidationReport rep;
  rep.grid_size = grid_size;
  for (const auto& br : m.branches()) {
    BranchDiagnostics d;
    d.domain = br.domain;
    d.min_abs_deriv = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid_size; ++j) {
      const double x = br.domain.lo + (static_cast<double>(j) + 0.5) * br.domain.length() / grid_size;
      const double d1 = std::fabs(br.cdf(x));
      const double d2 = std::fabs(br.cd2f(x));
      d.min_abs_deriv = std::min(d.min_abs_deriv, d1);
      if (d1 > 0.0) d.nonlinearity = std::max(d.nonlinearity, d2 / d1);
    }
    rep.max_nonlinearity = std::max(rep.max_nonlinearity, d.nonlinearity);
    rep.branches.push_back(d);
  }
  rep.orders = m.local_orders();
  for (const auto& o : rep.orders) {
    if (!(o.left >= 1.0 - 0.05)) rep.flat_violations.push_back({o.point, Side::Left});
    if (!(o.right >= 1.0 - 0.05)) rep.flat_violations.push_back({o.point, Side::Right});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Collar extension

namespace {

struct CollarProfile {
  double a = 0.0;  // slope at the outer end
  double b = 0.0;
  double k = 2.0;  // profile a*t + b*t^k on t in [0,1]
};

// a + b = rise, a + b*k = slope_in, a > 0; when need_unit_slope also a >= 1.
CollarProfile solve_profile(double rise, double slope_in, bool need_unit_slope) {
  double k = 2.0;
  if (slope_in > rise) {
    k = std::max(k, std::floor(1.0 + (slope_in - rise) / rise) + 1.0);
    if (need_unit_slope) k = std::max(k, std::ceil(1.0 + (slope_in - rise) / (rise - 1.0)));
  }
  CollarProfile p;
  p.k = k;
  p.b = (slope_in - rise) / (k - 1.0);
  p.a = rise - p.b;
  return p;
}

// base + sign * (a*t + b*t^k), t = |x - origin| on the collar
Expr collar_expr(double base, double sign, double origin, bool reversed, const CollarProfile& p) {
  Expr t = Expr::binary(Op::Sub, Expr::var(), Expr::constant(origin));
  if (reversed) t = Expr::binary(Op::Sub, Expr::constant(origin), Expr::var());
  Expr lin = Expr::binary(Op::Mul, Expr::constant(p.a), t);
  Expr poly = Expr::binary(Op::Mul, Expr::constant(p.b), Expr::pow(t, p.k));
  Expr prof = Expr::binary(Op::Add, lin, poly);
  return Expr::binary(sign > 0 ? Op::Add : Op::Sub, Expr::constant(base), prof);
}

}  // namespace

PiecewiseMap extend_map(const PiecewiseMap& m) {
  const Interval amb = m.ambient();
  const double lo = amb.lo, hi = amb.hi;
  const double outer_lo = lo - 1.0, outer_hi = hi + 1.0;
  const std::size_t last = m.branches().size() - 1;

  const double y_lo = std::clamp(m.eval_branch(0, lo), lo, hi);
  const double d_lo = m.deriv_branch(0, lo);
  const double y_hi = std::clamp(m.eval_branch(last, hi), lo, hi);
  const double d_hi = m.deriv_branch(last, hi);
  if (d_lo == 0.0 || d_hi == 0.0 || !std::isfinite(d_lo) || !std::isfinite(d_hi))
    throw MapError("extend_map: boundary derivative of f vanishes");

  // Left collar, t = x - (lo-1).
  Expr left;
  if (d_lo > 0) {
    const double rise = y_lo - outer_lo;
    left = collar_expr(outer_lo, +1, outer_lo, false, solve_profile(rise, d_lo, rise > 1.0));
  } else {
    const double rise = outer_hi - y_lo;
    left = collar_expr(outer_hi, -1, outer_lo, false, solve_profile(rise, -d_lo, false));
  }

  // Right collar, t = (hi+1) - x.
  Expr right;
  if (d_hi > 0) {
    const double rise = outer_hi - y_hi;
    right = collar_expr(outer_hi, -1, outer_hi, true, solve_profile(rise, d_hi, rise > 1.0));
  } else {
    const double rise = y_hi - outer_lo;
    right = collar_expr(outer_lo, +1, outer_hi, true, solve_profile(rise, -d_hi, false));
  }

  MapSpec spec;
  spec.ambient = {outer_lo, outer_hi};
  spec.branches.push_back({{outer_lo, lo}, to_string(left)});
  for (const auto& b : m.spec().branches) spec.branches.push_back(b);
  spec.branches.push_back({{hi, outer_hi}, to_string(right)});
  spec.regular_joints = m.spec().regular_joints;
  spec.regular_joints.push_back(lo);
  spec.regular_joints.push_back(hi);
  return PiecewiseMap::build(spec);
}

}  // namespace pwdyn

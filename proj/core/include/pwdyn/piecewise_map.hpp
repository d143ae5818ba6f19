#pragma once

// Piecewise C^2 non-flat interval maps f : [lo,hi] \ C_f -> [lo,hi].
//
// The map is never evaluated on its exceptional set C_f; only the one-sided
// limits f(c-) and f(c+) exist there. Membership in C_f is exact binary64
// equality.

#include <cstddef>
#include <string>
#include <vector>

#include "pwdyn/expr.hpp"

namespace pwdyn {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool contains_open(double x) const noexcept { return lo < x && x < hi; }
  bool contains_closed(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Side { Left, Right };

const char* to_string(Side s) noexcept;

// A point approached from one side: (c, Left) stands for c-.
struct LateralPoint {
  double point = 0.0;
  Side side = Side::Left;

  friend bool operator==(const LateralPoint&, const LateralPoint&) = default;
};

struct BranchSpec {
  Interval domain;
  std::string expr;
};

struct MapSpec {
  Interval ambient{0.0, 1.0};
  std::vector<BranchSpec> branches;
  // Interior branch endpoints at which the map is smooth (C^1 joints). Every
  // other interior endpoint belongs to C_f.
  std::vector<double> regular_joints;
};

struct LateralValue {
  LateralPoint at;
  double value = 0.0;
};

// Fitted local power law |f(c +- e) - f(c+-)| ~ e^order at an exceptional point.
struct LocalOrder {
  double point = 0.0;
  double left = 1.0;
  double right = 1.0;
};

struct DerivProduct {
  double log_abs = 0.0;
  int sign = 1;
};

class PiecewiseMap {
public:
  struct Branch {
    Interval domain;
    std::string source;
    Expr f, df, d2f;
    CompiledExpr cf, cdf, cd2f;
  };

  static PiecewiseMap build(const MapSpec& spec);

  const Interval& ambient() const noexcept { return ambient_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  const std::vector<double>& exceptional() const noexcept { return exceptional_; }
  const std::vector<LateralValue>& lateral_values() const noexcept { return lateral_values_; }
  const std::vector<LocalOrder>& local_orders() const noexcept { return orders_; }
  const MapSpec& spec() const noexcept { return spec_; }

  bool is_exceptional(double x) const noexcept;
  // Branch whose closed domain holds x; throws ExceptionalPoint / OutOfRange.
  std::size_t branch_index(double x) const;

  double eval(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;
  double eval_lateral(const LateralPoint& p) const;
  double deriv_lateral(const LateralPoint& p) const;

  // Closure evaluation of branch i, no membership checks. NaN on a domain
  // error inside the expression.
  double eval_branch(std::size_t i, double x) const noexcept;
  double deriv_branch(std::size_t i, double x) const noexcept;
  double deriv2_branch(std::size_t i, double x) const noexcept;

  // Hot-loop step: NaN when x is exceptional, outside the ambient interval, or
  // the expression fails. Results are clamped into the ambient interval.
  double step(double x) const noexcept;
  double step(double x, double& dfx) const noexcept;

  // Index of the branch containing x, or npos when x is exceptional or out
  // of range.
  std::size_t find_branch(double x) const noexcept;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  PiecewiseMap() = default;

  MapSpec spec_;
  Interval ambient_;
  std::vector<Branch> branches_;
  std::vector<double> breaks_;  // interior endpoints, sorted (exceptional + regular)
  std::vector<double> exceptional_;
  std::vector<LateralValue> lateral_values_;
  std::vector<LocalOrder> orders_;
};

inline PiecewiseMap build_map(const MapSpec& spec) { return PiecewiseMap::build(spec); }

// Sum of log|Df| and sign of the product along x, f(x), ..., f^{n-1}(x).
// Throws OrbitHitsExceptional(i) if iterate i lies in C_f.
DerivProduct deriv_product(const PiecewiseMap& m, double x, std::size_t n);

// Extension to [lo-1, hi+1] that agrees with m on [lo,hi], is a C^1 local
// diffeomorphism across lo and hi, keeps C_f, and sends {lo-1, hi+1} into
// itself. Each collar point either tends to {lo-1, hi+1} or enters [lo,hi].
PiecewiseMap extend_map(const PiecewiseMap& m);

struct BranchDiagnostics {
  Interval domain;
  double min_abs_deriv = 0.0;
  double nonlinearity = 0.0;  // sup |D^2 f| / |D f| on the grid
};

struct ValidationReport {
  std::size_t grid_size = 0;
  std::vector<BranchDiagnostics> branches;
  std::vector<LocalOrder> orders;
  std::vector<LateralPoint> flat_violations;  // fitted order < 1
  double max_nonlinearity = 0.0;

  bool ok() const noexcept { return flat_violations.empty(); }
};

ValidationReport validate_nonflat(const PiecewiseMap& m, std::size_t grid_size = 1000);

// Least-squares log-log slope of |f(c +- e) - f(c+-)| over e = 1e-3 .. 1e-7.
double fit_local_order(const PiecewiseMap& m, const LateralPoint& p);

}  // namespace pwdyn

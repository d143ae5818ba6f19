#include "pwdyn/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pwdyn/error.hpp"
#include "pwdyn/parallel.hpp"
#include "pwdyn/rng.hpp"
#include "solve.hpp"

namespace pwdyn {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

OrbitSegment orbit(const PiecewiseMap& m, double x, std::size_t n) {
  if (!m.ambient().contains_closed(x)) throw OutOfRange(x);
  OrbitSegment seg;
  seg.start = x;
  seg.iterates.reserve(n);
  seg.log_deriv_prefix.reserve(n + 1);
  seg.log_deriv_prefix.push_back(0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.is_exceptional(x)) {
      seg.terminated_at_exceptional = i;
      break;
    }
    double d = 0.0;
    double y = m.step(x, d);
    if (std::isnan(y) || std::isnan(d)) {
      y = m.eval(x);  // raises the evaluation error with context
      d = m.deriv(x);
    }
    acc += std::log(std::fabs(d));
    seg.iterates.push_back(y);
    seg.log_deriv_prefix.push_back(acc);
    x = y;
  }
  return seg;
}

// ---------------------------------------------------------------------------
// Covers

double IntervalCover::measure() const noexcept {
  double s = 0.0;
  for (const auto& c : cells) s += c.length();
  return s;
}

bool IntervalCover::contains(double x) const noexcept {
  auto it = std::upper_bound(cells.begin(), cells.end(), x, [](double v, const Interval& c) { return v < c.lo; });
  if (it == cells.begin()) return false;
  return (it - 1)->contains_closed(x);
}

double IntervalCover::max_cell() const noexcept {
  double s = 0.0;
  for (const auto& c : cells) s = std::max(s, c.length());
  return s;
}

namespace {

double intersection_measure(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) s += hi - lo;
    if (a[i].hi < b[j].hi) ++i;
    else ++j;
  }
  return s;
}

std::vector<Interval> merge_sorted(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> out;
  for (const auto& c : v) {
    if (!out.empty() && c.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, c.hi);
    else out.push_back(c);
  }
  return out;
}

}  // namespace

double symmetric_difference(const IntervalCover& a, const IntervalCover& b) {
  return std::max(0.0, a.measure() + b.measure() - 2.0 * intersection_measure(a.cells, b.cells));
}

IntervalCover cover_union(const IntervalCover& a, const IntervalCover& b) {
  std::vector<Interval> all = a.cells;
  all.insert(all.end(), b.cells.begin(), b.cells.end());
  return {std::max(a.resolution, b.resolution), merge_sorted(std::move(all))};
}

double uncovered_measure(const IntervalCover& small, const IntervalCover& big, double slack) {
  std::vector<Interval> fat;
  fat.reserve(big.cells.size());
  for (const auto& c : big.cells) fat.push_back({c.lo - slack, c.hi + slack});
  fat = merge_sorted(std::move(fat));
  return std::max(0.0, small.measure() - intersection_measure(small.cells, fat));
}

CoverBuilder::CoverBuilder(const Interval& amb, double res) : ambient(amb), resolution(res) {
  const double n = std::ceil(amb.length() / res);
  bins.assign(static_cast<std::size_t>(std::max(1.0, n)), 0);
}

void CoverBuilder::add(double y) noexcept {
  if (!(y >= ambient.lo && y <= ambient.hi)) return;
  auto i = static_cast<std::size_t>((y - ambient.lo) / resolution);
  if (i >= bins.size()) i = bins.size() - 1;
  bins[i] = 1;
}

IntervalCover CoverBuilder::finish() const {
  IntervalCover c;
  c.resolution = resolution;
  const std::size_t n = bins.size();
  for (std::size_t i = 0; i < n;) {
    if (!bins[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && bins[j + 1]) ++j;
    Interval cell{ambient.lo + static_cast<double>(i) * resolution,
                  std::min(ambient.hi, ambient.lo + static_cast<double>(j + 1) * resolution)};
    if (cell.length() < resolution) cell.lo = std::max(ambient.lo, cell.hi - resolution);
    if (!c.cells.empty() && cell.lo <= c.cells.back().hi) c.cells.back().hi = cell.hi;
    else c.cells.push_back(cell);
    i = j + 1;
  }
  return c;
}

NoisyStepper::NoisyStepper(const PiecewiseMap& m, OrbitNoise noise) noexcept
    : m_(&m), amp_(noise.amplitude), state_(noise.seed) {}

double NoisyStepper::operator()(double x) noexcept {
  double y = m_->step(x);
  if (std::isnan(y) || amp_ == 0.0) return y;
  SplitMix64 g(state_);
  state_ = g.next();
  const double u = 2.0 * SplitMix64(state_).uniform() - 1.0;
  const Interval& a = m_->ambient();
  y += amp_ * u;
  if (y < a.lo) y = std::min(a.hi, 2.0 * a.lo - y);
  if (y > a.hi) y = std::max(a.lo, 2.0 * a.hi - y);
  if (m_->is_exceptional(y)) y = std::nextafter(y, a.hi);
  return y;
}

IntervalCover omega_cover(const PiecewiseMap& m, double x, std::size_t burn_in, std::size_t length,
                          double resolution, OrbitNoise noise) {
  if (!(resolution >= 1e-6)) throw PreconditionError("omega_cover: resolution must be >= 1e-6");
  if (burn_in + length > 10'000'000) throw PreconditionError("omega_cover: burn_in + length must be <= 1e7");
  if (!m.ambient().contains_closed(x)) throw OutOfRange(x);
  CoverBuilder cb(m.ambient(), resolution);
  if (length == 0) return cb.finish();
  NoisyStepper step(m, noise);
  for (std::size_t i = 0; i < burn_in; ++i) {
    x = step(x);
    if (std::isnan(x)) throw DegenerateOrbit("orbit hit the exceptional set during burn-in");
  }
  for (std::size_t i = 0; i < length; ++i) {
    cb.add(x);
    if (i + 1 == length) break;
    x = step(x);
    if (std::isnan(x)) break;
  }
  return cb.finish();
}

// ---------------------------------------------------------------------------
// Periodic-like points

namespace {

// f^l(x) by exact steps; NaN if undefined along the way.
double iterate(const PiecewiseMap& m, double x, std::size_t l) noexcept {
  for (std::size_t i = 0; i < l && !std::isnan(x); ++i) x = m.step(x);
  return x;
}

}  // namespace

std::optional<PeriodicLike> detect_periodic_like(const PiecewiseMap& m, const LateralPoint& p, std::size_t l_max,
                                                 double tol) {
  if (l_max > 64) throw PreconditionError("detect_periodic_like: l_max must be <= 64");
  const double sgn = p.side == Side::Left ? -1.0 : 1.0;
  const double ladder[3] = {1e-4, 1e-5, 1e-6};
  const Interval& amb = m.ambient();
  double y = m.eval_lateral(p);  // lateral limit of f^l at p
  for (std::size_t l = 1; l <= l_max; ++l) {
    if (l > 1) y = m.step(y);
    if (std::isnan(y)) return std::nullopt;
    if (std::fabs(y - p.point) > tol) continue;

    double dist[3];
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      const double x0 = p.point + sgn * ladder[k];
      if (!amb.contains_closed(x0)) {
        ok = false;
        break;
      }
      const double xl = iterate(m, x0, l);
      if (std::isnan(xl)) {
        ok = false;
        break;
      }
      const double d = (xl - p.point) * sgn;  // >= 0 on the same side
      if (d < 0) ok = false;
      dist[k] = d;
    }
    if (!ok || dist[1] > dist[0] || dist[2] > dist[1]) continue;

    double mult = 0.0;
    if (dist[2] > 0.0) {
      const double slope = std::log(dist[0] / dist[2]) / std::log(ladder[0] / ladder[2]);
      if (slope < 0.9) continue;  // not shrinking with e: no lateral return
      if (slope <= 1.1) {
        const double r2 = dist[1] / ladder[1], r3 = dist[2] / ladder[2];
        mult = std::max(0.0, r3 - (r2 - r3) * ladder[2] / (ladder[1] - ladder[2]));
      }
    }

    PeriodicLike out{p, l, mult, mult < 1.0 - 1e-9};
    if (!out.attracting && std::fabs(mult - 1.0) <= 1e-6) {
      // Neutral: look for one-sided convergence directly.
      double x = p.point + sgn * 1e-4;
      bool same_side = true;
      for (int i = 0; i < 10000 && same_side; ++i) {
        x = iterate(m, x, l);
        if (std::isnan(x) || (x - p.point) * sgn < 0) same_side = false;
      }
      out.attracting = same_side && std::fabs(x - p.point) < 0.5e-4;
    }
    return out;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Periodic points by cylinder enumeration

namespace {

constexpr std::size_t kMaxCylinders = 10'000'000;

struct CylinderWalk {
  const PiecewiseMap& m;
  std::size_t period_max;
  std::vector<std::size_t> itin;
  std::vector<PeriodicPoint> found;
  std::size_t cylinders = 0;

  double g(double x) const noexcept {
    for (std::size_t b : itin) x = m.eval_branch(b, x);
    return x;
  }

  // x in [a,b] with g(x) = t, g monotone with orientation `up`.
  double preimage(double a, double b, double ga, double gb, double t) const noexcept {
    return detail::solve_monotone([&](double x) { return g(x); }, a, b, ga, gb, t);
  }

  void roots(double a, double b) {
    constexpr int kScan = 16;
    double xs[kScan + 1], hs[kScan + 1];
    for (int i = 0; i <= kScan; ++i) {
      xs[i] = i == kScan ? b : a + (b - a) * i / kScan;
      hs[i] = g(xs[i]) - xs[i];
    }
    for (int i = 0; i <= kScan; ++i) {
      if (hs[i] == 0.0) accept(xs[i]);
      if (i == kScan || !(hs[i] * hs[i + 1] < 0.0)) continue;
      double lo = xs[i], hi = xs[i + 1], hlo = hs[i];
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double hm = g(mid) - mid;
        if (hm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((hm < 0) == (hlo < 0)) {
          lo = mid;
          hlo = hm;
        } else {
          hi = mid;
        }
      }
      accept(0.5 * (lo + hi));
    }
  }

  void accept(double r) {
    const std::size_t n = itin.size();
    double x = r, mult = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      x = m.step(x, d);
      if (std::isnan(x)) return;  // lateral return only
      mult *= std::fabs(d);
    }
    const double resid = std::fabs(x - r);
    if (resid > std::max(1e-9, 1e-14 * mult)) return;
    found.push_back({r, n, mult});
  }

  void visit(double a, double b) {
    if (++cylinders > kMaxCylinders) throw BranchExplosion("periodic search exceeded 1e7 cylinders");
    if (!itin.empty()) roots(a, b);
    if (itin.size() == period_max) return;
    const double ga = itin.empty() ? a : g(a);
    const double gb = itin.empty() ? b : g(b);
    const double ilo = std::min(ga, gb), ihi = std::max(ga, gb);
    const auto& br = m.branches();
    for (std::size_t j = 0; j < br.size(); ++j) {
      const double u = std::max(ilo, br[j].domain.lo);
      const double v = std::min(ihi, br[j].domain.hi);
      if (!(v > u)) continue;
      double xu, xv;
      if (itin.empty()) {
        xu = u;
        xv = v;
      } else {
        xu = preimage(a, b, ga, gb, u);
        xv = preimage(a, b, ga, gb, v);
      }
      const double ca = std::min(xu, xv), cb = std::max(xu, xv);
      if (!(cb > ca)) continue;
      itin.push_back(j);
      visit(ca, cb);
      itin.pop_back();
    }
  }
};

}  // namespace

std::vector<PeriodicPoint> find_periodic_points(const PiecewiseMap& m, std::size_t period_max, double tol) {
  if (period_max > 24) throw PreconditionError("find_periodic_points: period_max must be <= 24");
  if (period_max == 0) return {};
  CylinderWalk w{m, period_max, {}, {}, 0};
  w.visit(m.ambient().lo, m.ambient().hi);
  auto& f = w.found;
  std::sort(f.begin(), f.end(), [](const PeriodicPoint& a, const PeriodicPoint& b) { return a.point < b.point; });
  std::vector<PeriodicPoint> out;
  for (std::size_t i = 0; i < f.size();) {
    std::size_t j = i;
    PeriodicPoint best = f[i];
    while (j < f.size() && f[j].point - f[i].point <= tol) {
      if (f[j].period < best.period) best = f[j];
      ++j;
    }
    out.push_back(best);
    i = j;
  }
  return out;
}

std::vector<double> periodic_orbit(const PiecewiseMap& m, const PeriodicPoint& p) {
  std::vector<double> o{p.point};
  double x = p.point;
  for (std::size_t i = 1; i < p.period; ++i) {
    x = m.step(x);
    o.push_back(x);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Basin sampling

double sample_point(const PiecewiseMap& m, std::uint64_t seed, std::size_t index) {
  auto g = SplitMix64::stream(seed, index);
  return g.uniform(m.ambient().lo, m.ambient().hi);
}

namespace {

double dist_to_exceptional(const std::vector<double>& cf, double x) noexcept {
  if (cf.empty()) return std::numeric_limits<double>::infinity();
  auto it = std::lower_bound(cf.begin(), cf.end(), x);
  double d = std::numeric_limits<double>::infinity();
  if (it != cf.end()) d = *it - x;
  if (it != cf.begin()) d = std::min(d, x - *(it - 1));
  return d;
}

std::optional<TailMatch> match_tail(const PiecewiseMap& m, const std::vector<double>& tail, const BasinConfig& cfg) {
  const std::size_t n = tail.size();
  for (std::size_t p = 1; p <= cfg.max_period && 2 * p < n; ++p) {
    const std::size_t checks = std::min(n - p, 2 * p + 8);
    bool ok = true;
    for (std::size_t k = 0; k < checks && ok; ++k)
      ok = std::fabs(tail[n - 1 - k] - tail[n - 1 - k - p]) <= cfg.periodic_tol;
    if (!ok) continue;

    TailMatch tm;
    tm.period = p;
    tm.orbit.assign(tail.end() - static_cast<std::ptrdiff_t>(p), tail.end());
    double mult = 1.0;
    for (double x : tm.orbit) {
      double d = 0.0;
      m.step(x, d);
      if (std::isnan(d)) d = 0.0;  // exactly on C_f; handled as lateral below
      mult *= std::fabs(d);
    }
    // A lateral limit on C_f is judged by the one-sided behaviour instead.
    for (double x : tm.orbit) {
      for (double c : m.exceptional()) {
        if (std::fabs(x - c) <= cfg.periodic_tol) {
          tm.lateral = LateralPoint{c, x < c ? Side::Left : Side::Right};
          mult = 0.0;
        }
      }
    }
    tm.multiplier = mult;
    if (mult > 1.0 + 1e-6) return std::nullopt;
    std::rotate(tm.orbit.begin(), std::min_element(tm.orbit.begin(), tm.orbit.end()), tm.orbit.end());
    return tm;
  }
  return std::nullopt;
}

}  // namespace

std::vector<RawPointRecord> basin_sample(const PiecewiseMap& m, std::size_t sample_count, std::uint64_t seed,
                                         const BasinConfig& cfg) {
  if (sample_count == 0) throw PreconditionError("basin_sample: sample_count must be >= 1");
  if (!(cfg.resolution >= 1e-6)) throw PreconditionError("basin_sample: resolution must be >= 1e-6");
  std::vector<RawPointRecord> out(sample_count);
  const auto& cf = m.exceptional();
  parallel_for(sample_count, cfg.threads, [&](std::size_t i) {
    RawPointRecord& r = out[i];
    r.index = i;
    auto g = SplitMix64::stream(seed, i);
    r.x0 = g.uniform(m.ambient().lo, m.ambient().hi);
    NoisyStepper step(m, {cfg.noise, g.next()});
    CoverBuilder cb(m.ambient(), cfg.resolution);
    r.min_dist_to_exceptional = std::numeric_limits<double>::infinity();
    const std::size_t keep = 3 * cfg.max_period + 8;
    std::vector<double> tail;
    tail.reserve(keep);
    double x = r.x0;
    const std::size_t total = cfg.burn_in + cfg.length;
    for (std::size_t k = 0; k < total; ++k) {
      if (k >= cfg.burn_in) {
        cb.add(x);
        r.min_dist_to_exceptional = std::min(r.min_dist_to_exceptional, dist_to_exceptional(cf, x));
        if (k + keep >= total) tail.push_back(x);
      }
      if (k + 1 == total) break;
      const double y = step(x);
      if (std::isnan(y)) {
        r.terminated_at_exceptional = k;
        break;
      }
      x = y;
    }
    r.cover = cb.finish();
    if (!r.terminated_at_exceptional) r.matched = match_tail(m, tail, cfg);
  });
  return out;
}

}  // namespace pwdyn

// Expansion analysis of first-return maps, the entry-map model check,
// cylinder partitions and induced orbit covers.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pwdyn/error.hpp"
#include "pwdyn/induction.hpp"
#include "pwdyn/rng.hpp"
#include "solve.hpp"

namespace pwdyn {

namespace {

using detail::solve_monotone;
constexpr double kInf = std::numeric_limits<double>::infinity();

// x in D with F_b(x) = t; F_b monotone on D.
double branch_preimage(const InducedMap& ind, std::size_t b, const Interval& D, double t) {
  return solve_monotone([&](double x) { return ind.apply(b, x); }, D.lo, D.hi, ind.apply(b, D.lo),
                        ind.apply(b, D.hi), t);
}

// Component of the complement of the closed critical orbits holding J.
Interval critical_gap(const PiecewiseMap& m, const Interval& J) {
  Interval T = m.ambient();
  for (const auto& lv : m.lateral_values()) {
    double y = lv.value;
    std::vector<double> seen;
    for (int k = 0; k < 10000 && !std::isnan(y); ++k) {
      if (y <= J.lo) T.lo = std::max(T.lo, y);
      else if (y >= J.hi) T.hi = std::min(T.hi, y);
      else return {J.lo, J.hi};  // J meets the critical orbits: no room
      bool cyc = false;
      for (double s : seen) cyc = cyc || std::fabs(s - y) <= 1e-11;
      if (cyc) break;
      if (seen.size() < 64) seen.push_back(y);
      y = m.step(y);
    }
  }
  return T;
}

FlankReport analyse_flank(const InducedMap& ind, const PiecewiseMap& m, const Interval& I, const Interval& Jc,
                          double eps, double K) {
  FlankReport fr;
  fr.I = I;
  fr.Jc = Jc;
  // First return of F to I.
  constexpr std::size_t kProbes = 256;
  constexpr std::size_t kCap = 100000;
  double min_log = kInf;
  for (std::size_t k = 0; k < kProbes; ++k) {
    double y = I.lo + (static_cast<double>(k) + 0.5) * I.length() / kProbes;
    double lg = 0.0;
    bool back = false;
    for (std::size_t s = 0; s < kCap; ++s) {
      const std::size_t b = ind.find(y);
      if (b == InducedMap::npos) break;
      lg += std::log(std::fabs(ind.deriv(b, y)));
      y = ind.apply(b, y);
      if (I.contains_open(y)) {
        back = true;
        break;
      }
      if (!ind.base.contains_closed(y)) break;
    }
    ++fr.probes;
    if (!back) {
      ++fr.probes_unreturned;
      continue;
    }
    min_log = std::min(min_log, lg);
  }
  fr.min_return_deriv = std::isfinite(min_log) ? std::exp(min_log) : 0.0;

  // First entry of J_j into I_j under f.
  fr.entry_bound = I.length() / (eps * K * Jc.length());
  double min_entry = kInf;
  if (Jc.length() > 0.0) {
    constexpr std::size_t kEntryProbes = 64;
    constexpr std::size_t kEntryCap = 200000;
    for (std::size_t k = 0; k < kEntryProbes; ++k) {
      double x = Jc.lo + (static_cast<double>(k) + 0.5) * Jc.length() / kEntryProbes;
      double lg = 0.0;
      bool in = false;
      for (std::size_t s = 0; s < kEntryCap; ++s) {
        double d = 0.0;
        x = m.step(x, d);
        if (std::isnan(x)) break;
        lg += std::log(std::fabs(d));
        if (I.contains_open(x)) {
          in = true;
          break;
        }
      }
      if (!in) continue;
      ++fr.entry_probes;
      min_entry = std::min(min_entry, std::exp(lg));
    }
  }
  fr.min_entry_deriv = std::isfinite(min_entry) ? min_entry : 0.0;
  fr.entry_bound_holds = fr.entry_probes > 0 && fr.min_entry_deriv >= fr.entry_bound;
  return fr;
}

}  // namespace

const char* to_string(ExpansionMode m) noexcept {
  return m == ExpansionMode::UniformlyExpanding ? "uniformly_expanding" : "neutral_core";
}

ExpansionReport expansion_analysis(const InducedMap& ind, const PiecewiseMap& m) {
  if (ind.kind != InducedKind::FirstReturn) throw PreconditionError("expansion_analysis: needs a first-return map");
  if (ind.branches.empty()) throw PreconditionError("expansion_analysis: induced map has no branches");
  ExpansionReport r;
  const Interval& J = ind.base;
  r.distortion = measure_distortion(ind, 32);
  r.epsilon = std::sqrt(std::max(0.0, r.distortion - 1.0));
  const double eps2 = r.epsilon * r.epsilon;
  const double O1 = nonlinearity(m);
  r.K = 5.0 * std::exp(O1);
  r.applicable = r.epsilon < 1.0 / (6.0 * r.K);

  // Weakest point of F.
  std::size_t pb = 0;
  double p = 0.0, pd = kInf;
  for (std::size_t b = 0; b < ind.branches.size(); ++b) {
    const Interval& D = ind.branches[b].domain;
    for (int k = 0; k < 64; ++k) {
      const double x = D.lo + (k + 0.5) * D.length() / 64;
      const double d = std::fabs(ind.deriv(b, x));
      if (d < pd) pd = d, pb = b, p = x;
    }
  }
  (void)p;

  Interval calI = J;
  if (pd > 1.0 + eps2) {
    r.mode = ExpansionMode::UniformlyExpanding;
    r.min_expansion = pd;
    r.valid = r.applicable;
  } else {
    r.mode = ExpansionMode::NeutralCore;
    const Interval Ip0 = ind.branches[pb].domain;
    r.Ip0 = Ip0;
    const double f_lo = ind.apply(pb, Ip0.lo), f_hi = ind.apply(pb, Ip0.hi);
    const double img_lo = std::min(f_lo, f_hi), img_hi = std::max(f_lo, f_hi);
    if (!(img_lo <= Ip0.lo && img_hi >= Ip0.hi))
      throw NeutralCoreNotBracketable("the weak branch does not cover its own domain");
    const double u = branch_preimage(ind, pb, Ip0, Ip0.lo), v = branch_preimage(ind, pb, Ip0, Ip0.hi);
    const Interval Ip{std::min(u, v), std::max(u, v)};
    r.Ip = Ip;

    // Fix(F^2) in I_p from sign changes on a 2^14 grid.
    auto h = [&](double x) { return ind.apply(pb, ind.apply(pb, x)) - x; };
    constexpr int kGrid = 1 << 14;
    double fa = kInf, fb = -kInf;
    double x0 = Ip.lo, h0 = h(x0);
    for (int k = 1; k <= kGrid; ++k) {
      const double x1 = k == kGrid ? Ip.hi : Ip.lo + Ip.length() * k / kGrid;
      const double h1 = h(x1);
      if (h0 == 0.0) fa = std::min(fa, x0), fb = std::max(fb, x0);
      if (h0 * h1 < 0.0) {
        double lo = x0, hi = x1, hlo = h0;
        while (hi - lo > 1e-10) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double hm = h(mid);
          if ((hm < 0) == (hlo < 0)) lo = mid, hlo = hm;
          else hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        fa = std::min(fa, root);
        fb = std::max(fb, root);
      }
      x0 = x1;
      h0 = h1;
    }
    if (h0 == 0.0) fa = std::min(fa, x0), fb = std::max(fb, x0);
    if (!(fa <= fb)) throw NeutralCoreNotBracketable("no sign change of F^2(x) - x inside I_p");
    r.fixed_hull = Interval{fa, fb};

    const double eps_use = std::max(r.epsilon, 1e-300);
    if (Ip.lo > J.lo) r.flanks.push_back(analyse_flank(ind, m, {J.lo, Ip.lo}, {Ip.lo, fa}, eps_use, r.K));
    if (Ip.hi < J.hi) r.flanks.push_back(analyse_flank(ind, m, {Ip.hi, J.hi}, {fb, Ip.hi}, eps_use, r.K));
    if (r.flanks.empty()) throw NeutralCoreNotBracketable("I_p fills J: no flanks");
    double mn = kInf;
    for (std::size_t j = 0; j < r.flanks.size(); ++j) {
      mn = std::min(mn, r.flanks[j].min_return_deriv);
      if (r.flanks[j].I.length() > r.flanks[r.chosen_flank].I.length()) r.chosen_flank = j;
    }
    r.min_expansion = mn;
    r.valid = r.applicable && mn > 3.0;
    calI = r.flanks[r.chosen_flank].I;
  }

  r.T = critical_gap(m, J);
  const double space = std::min(J.lo - r.T.lo, r.T.hi - J.hi);
  r.delta = space > 0.0 ? space / J.length() : 0.0;
  r.K0 = r.delta > 0.0 ? std::pow((1.0 + r.delta) / r.delta, 2) * std::exp(O1) : kInf;
  r.gamma0 = O1 + 2.0 / J.length();
  r.gamma = r.K0 * r.gamma0 / calI.length();
  double geometric;  // sum of (expansion)^{-j}
  if (eps2 > 0.0) geometric = 1.0 + 1.0 / eps2;
  else if (r.min_expansion > 1.0) geometric = r.min_expansion / (r.min_expansion - 1.0);
  else geometric = kInf;
  r.Gamma = std::exp(r.gamma * geometric);
  return r;
}

ToyEntryCheck toy_entry_check(double c, double a, double b, std::size_t max_branches, std::size_t probes) {
  if (!(c > 0.0) || !(b > a) || probes == 0) throw PreconditionError("toy_entry_check: need c > 0, b > a");
  auto g = [&](double x) { return x + c * (x - a) * (x - a); };
  auto dg = [&](double x) { return 1.0 + 2.0 * c * (x - a); };
  auto ginv = [&](double y) {
    const double s = y - a;
    return a + 2.0 * s / (1.0 + std::sqrt(1.0 + 4.0 * c * s));
  };
  ToyEntryCheck out;
  out.epsilon = 2.0 * c * (b - a) * (1.0 + 1e-9);
  const double jlo = b, jhi = g(b);
  std::vector<std::vector<double>> derivs;
  double hi_edge = b;  // a_1
  for (std::size_t n = 1; n <= max_branches; ++n) {
    const double lo_edge = ginv(hi_edge);  // a_{n+1}
    if (!(hi_edge - lo_edge > 1e-13)) break;
    std::vector<double> ds;
    for (std::size_t k = 0; k < probes; ++k) {
      double x = lo_edge + (static_cast<double>(k) + 0.5) * (hi_edge - lo_edge) / static_cast<double>(probes);
      double d = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        d *= dg(x);
        x = g(x);
      }
      ds.push_back(d);
    }
    derivs.push_back(std::move(ds));
    hi_edge = lo_edge;
  }
  out.K = 1.0;
  for (const auto& ds : derivs) {
    const auto [mn, mx] = std::minmax_element(ds.begin(), ds.end());
    out.K = std::max(out.K, *mx / *mn);
  }
  out.K *= 1.0 + 1e-12;
  out.bound = (jhi - jlo) / (out.epsilon * out.K * (b - a));
  out.min_deriv = kInf;
  for (const auto& ds : derivs)
    for (double d : ds) out.min_deriv = std::min(out.min_deriv, d), ++out.probes;
  out.branches = derivs.size();
  out.holds = out.probes > 0 && out.min_deriv >= out.bound;
  return out;
}

// ---------------------------------------------------------------------------

Partition refine_partition(const InducedMap& ind, std::size_t n) {
  if (n > 8) throw PreconditionError("refine_partition: n must be <= 8");
  const double count = static_cast<double>(ind.branches.size());
  if (std::pow(count, static_cast<double>(n + 1)) > 1e6)
    throw BranchExplosion("refine_partition: branch count^(n+1) exceeds 1e6");

  struct Cell {
    Interval dom;
    std::vector<std::size_t> itin;
  };
  auto compose = [&](const std::vector<std::size_t>& itin, double x) {
    for (std::size_t b : itin) x = ind.apply(b, x);
    return x;
  };
  auto log_deriv = [&](const std::vector<std::size_t>& itin, double x) {
    double l = 0.0;
    for (std::size_t b : itin) {
      l += std::log(std::fabs(ind.deriv(b, x)));
      x = ind.apply(b, x);
    }
    return l;
  };

  Partition P;
  P.depth = n;
  std::vector<Cell> level;
  for (std::size_t b = 0; b < ind.branches.size(); ++b) level.push_back({ind.branches[b].domain, {b}});
  auto diameter = [](const std::vector<Cell>& cs) {
    double d = 0.0;
    for (const auto& c : cs) d = std::max(d, c.dom.length());
    return d;
  };
  P.max_diameter.push_back(diameter(level));

  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Cell> next;
    for (const auto& c : level) {
      const double ya = compose(c.itin, c.dom.lo), yb = compose(c.itin, c.dom.hi);
      const double lo = std::min(ya, yb), hi = std::max(ya, yb);
      auto pre = [&](double t) {
        return solve_monotone([&](double x) { return compose(c.itin, x); }, c.dom.lo, c.dom.hi, ya, yb, t);
      };
      for (std::size_t b = 0; b < ind.branches.size(); ++b) {
        const Interval& D = ind.branches[b].domain;
        const double u = std::max(lo, D.lo), v = std::min(hi, D.hi);
        if (!(v > u)) continue;
        const double xu = pre(u), xv = pre(v);
        Cell child{{std::min(xu, xv), std::max(xu, xv)}, c.itin};
        child.itin.push_back(b);
        if (child.dom.hi > child.dom.lo) next.push_back(std::move(child));
      }
    }
    std::sort(next.begin(), next.end(), [](const Cell& x, const Cell& y) { return x.dom.lo < y.dom.lo; });
    level = std::move(next);
    P.max_diameter.push_back(diameter(level));
  }

  for (auto& c : level) {
    PartitionCell pc;
    pc.domain = c.dom;
    double lo = kInf, hi = -kInf;
    for (double t : {0.05, 0.275, 0.5, 0.725, 0.95}) {
      const double l = log_deriv(c.itin, c.dom.lo + t * c.dom.length());
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    pc.distortion = std::exp(hi - lo);
    pc.itinerary = std::move(c.itin);
    P.cells.push_back(std::move(pc));
  }
  return P;
}

IntervalCover induced_orbit_cover(const InducedMap& ind, double x, std::size_t burn_in, std::size_t length,
                                  double resolution, OrbitNoise noise) {
  const Interval& J = ind.base;
  if (!J.contains_closed(x)) throw OutOfRange(x);
  if (!(resolution > 0.0)) throw PreconditionError("induced_orbit_cover: resolution must be positive");
  const PiecewiseMap& m = *ind.map;
  CoverBuilder cb(J, resolution);
  SplitMix64 rng(noise.seed);
  for (std::size_t k = 0; k < burn_in + length; ++k) {
    if (k >= burn_in) cb.add(x);
    const std::size_t b = ind.find(x);
    double y;
    if (b != InducedMap::npos) {
      y = ind.apply(b, x);
    } else {
      // Not in a discovered branch: run f until the orbit is back in J.
      y = x;
      bool back = false;
      for (int s = 0; s < 100000; ++s) {
        y = m.step(y);
        if (std::isnan(y)) break;
        if (J.contains_open(y)) {
          back = true;
          break;
        }
      }
      if (!back) break;
    }
    if (noise.amplitude > 0.0) {
      y += noise.amplitude * (2.0 * rng.uniform() - 1.0);
      if (y < J.lo) y = std::min(J.hi, 2.0 * J.lo - y);
      if (y > J.hi) y = std::max(J.lo, 2.0 * J.hi - y);
      if (m.is_exceptional(y)) y = std::nextafter(y, J.hi);
    }
    if (std::isnan(y)) break;
    x = y;
  }
  return cb.finish();
}

}  // namespace pwdyn

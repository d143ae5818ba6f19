#include "pwdyn/induction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pwdyn/error.hpp"
#include "solve.hpp"

namespace pwdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCycleTol = 1e-11;

bool inside_open(const Interval& J, double y, double tol) noexcept { return J.lo + tol < y && y < J.hi - tol; }

// Exact orbit of y stays out of J for `horizon` points. Orbits that close up
// numerically (return within kCycleTol at lag <= 64) are cut there, which keeps
// binary64 drift on periodic endpoints from producing false entries.
bool orbit_avoids(const PiecewiseMap& m, double y, const Interval& J, std::size_t horizon) {
  std::vector<double> recent;
  recent.reserve(64);
  std::size_t head = 0;
  for (std::size_t k = 0; k < horizon; ++k) {
    if (std::isnan(y)) return true;
    if (inside_open(J, y, kCycleTol)) return false;
    for (double r : recent)
      if (std::fabs(r - y) <= kCycleTol) return true;
    if (recent.size() < 64) recent.push_back(y);
    else recent[head++ % 64] = y;
    y = m.step(y);
  }
  return true;
}

}  // namespace

bool is_nice(const PiecewiseMap& m, const Interval& J, std::size_t horizon) {
  const Interval& amb = m.ambient();
  if (!(J.lo < J.hi) || !amb.contains(J)) throw PreconditionError("is_nice: J must be a nontrivial subinterval");
  if (horizon == 0) return true;
  for (double e : {J.lo, J.hi}) {
    for (Side s : {Side::Left, Side::Right}) {
      if (s == Side::Left && !(e > amb.lo)) continue;
      if (s == Side::Right && !(e < amb.hi)) continue;
      if (!orbit_avoids(m, m.eval_lateral({e, s}), J, horizon)) return false;
    }
  }
  return true;
}

std::optional<Interval> find_nice_interval(const PiecewiseMap& m, double p, double delta, std::size_t horizon) {
  if (!(delta > 0.0)) throw PreconditionError("find_nice_interval: delta must be positive");
  const Interval& amb = m.ambient();
  if (p - delta <= amb.lo || p + delta >= amb.hi) throw PreconditionError("find_nice_interval: p within delta of the boundary");
  for (double c : m.exceptional())
    if (std::fabs(c - p) <= delta) throw PreconditionError("find_nice_interval: p within delta of the exceptional set");

  // Endpoints from periodic orbits: an orbit's closest points on either side
  // of p never enter the gap between them.
  std::vector<double> lows, highs;
  for (const auto& q : find_periodic_points(m, 8)) {
    if (q.point > p - delta && q.point < p - 1e-12) lows.push_back(q.point);
    if (q.point < p + delta && q.point > p + 1e-12) highs.push_back(q.point);
  }
  std::vector<Interval> cand;
  for (double a : lows)
    for (double b : highs) cand.push_back({a, b});
  for (int k = 0; k <= 20; ++k) {
    const double r = std::ldexp(delta, -k);
    cand.push_back({p - r, p + r});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Interval& x, const Interval& y) {
    if (x.length() != y.length()) return x.length() > y.length();
    return x.lo < y.lo;
  });
  for (const auto& J : cand)
    if (is_nice(m, J, horizon)) return J;
  return std::nullopt;
}

const char* to_string(InducedKind k) noexcept { return k == InducedKind::FirstEntry ? "first_entry" : "first_return"; }

std::size_t InducedMap::find(double x) const noexcept {
  auto it = std::upper_bound(branches.begin(), branches.end(), x,
                             [](double v, const InducedBranch& b) { return v < b.domain.lo; });
  if (it == branches.begin()) return npos;
  --it;
  if (x > it->domain.hi) return npos;
  return static_cast<std::size_t>(it - branches.begin());
}

double InducedMap::apply(std::size_t b, double x) const noexcept {
  for (std::size_t j : branches[b].itinerary) x = map->eval_branch(j, x);
  return x;
}

double InducedMap::deriv(std::size_t b, double x) const noexcept {
  double d = 1.0;
  for (std::size_t j : branches[b].itinerary) {
    d *= map->deriv_branch(j, x);
    x = map->eval_branch(j, x);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Branch discovery

namespace {

struct Piece {
  double a, b;    // domain
  double ya, yb;  // images of a and b under the itinerary
  std::vector<std::size_t> itin;
};

struct PieceOrder {
  bool operator()(const Piece& x, const Piece& y) const noexcept {
    const double lx = x.b - x.a, ly = y.b - y.a;
    if (lx != ly) return lx < ly;
    return x.a > y.a;
  }
};

class Discovery {
public:
  Discovery(const PiecewiseMap& m, const Interval& J, InducedKind kind, std::size_t t_max, const InductionConfig& cfg)
      : m_(m), J_(J), kind_(kind), t_max_(t_max), cfg_(cfg) {}

  void seed_return() { queue_.push({J_.lo, J_.hi, J_.lo, J_.hi, {}}); }

  void seed_entry(const Interval& T) {
    Piece whole{T.lo, T.hi, T.lo, T.hi, {}};
    split(whole);
  }

  void run(double total) {
    while (!queue_.empty()) {
      if ((total - covered_) <= cfg_.target_uncovered * total) break;
      if (steps_ >= cfg_.soft_budget) break;
      Piece p = queue_.top();
      queue_.pop();
      ++steps_;
      if (p.itin.size() >= t_max_) continue;
      advance(p);
    }
  }

  std::vector<InducedBranch> branches;
  double covered_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t cylinders_ = 0;

private:
  double g(const std::vector<std::size_t>& itin, double x) const noexcept {
    for (std::size_t j : itin) x = m_.eval_branch(j, x);
    return x;
  }

  // Point of [p.a, p.b] whose image is t.
  double preimage(const Piece& p, double t) const noexcept {
    return detail::solve_monotone([&](double x) { return g(p.itin, x); }, p.a, p.b, p.ya, p.yb, t);
  }

  void count() {
    if (++cylinders_ > cfg_.max_cylinders) throw BranchExplosion("induced map discovery exceeded 1e7 cylinders");
  }

  // Sub-piece of p whose image is [u, v] (u < v, inside the image of p).
  Piece restrict(const Piece& p, double u, double v) const {
    const double xu = preimage(p, u), xv = preimage(p, v);
    Piece c;
    c.itin = p.itin;
    if (xu <= xv) {
      c.a = xu, c.b = xv, c.ya = u, c.yb = v;
    } else {
      c.a = xv, c.b = xu, c.ya = v, c.yb = u;
    }
    return c;
  }

  // One more step of f on every branch of f met by the image of p.
  void advance(const Piece& p) {
    const double lo = std::min(p.ya, p.yb), hi = std::max(p.ya, p.yb);
    const auto& br = m_.branches();
    const Interval& amb = m_.ambient();
    for (std::size_t j = 0; j < br.size(); ++j) {
      const double u = std::max(lo, br[j].domain.lo), v = std::min(hi, br[j].domain.hi);
      if (!(v > u)) continue;
      count();
      Piece c = restrict(p, u, v);
      const double fa = std::clamp(m_.eval_branch(j, c.ya), amb.lo, amb.hi);
      const double fb = std::clamp(m_.eval_branch(j, c.yb), amb.lo, amb.hi);
      c.ya = fa;
      c.yb = fb;
      c.itin.push_back(j);
      if (!(c.b > c.a)) continue;
      split(c);
    }
  }

  // Separate the part of c landing in J (a branch) from the parts outside.
  void split(const Piece& c) {
    const double lo = std::min(c.ya, c.yb), hi = std::max(c.ya, c.yb);
    const double in_lo = std::max(lo, J_.lo), in_hi = std::min(hi, J_.hi);
    if (in_hi > in_lo) {
      Piece in = restrict(c, in_lo, in_hi);
      if (in.b - in.a >= cfg_.min_piece) add_branch(in);
    }
    if (std::min(hi, J_.lo) > lo) push(restrict(c, lo, std::min(hi, J_.lo)));
    if (hi > std::max(lo, J_.hi)) push(restrict(c, std::max(lo, J_.hi), hi));
  }

  void push(Piece&& p) {
    if (p.b - p.a < cfg_.min_piece) return;
    queue_.push(std::move(p));
  }

  void add_branch(const Piece& p) {
    if (kind_ == InducedKind::FirstReturn && p.itin.empty()) return;
    InducedBranch b;
    b.domain = {p.a, p.b};
    b.time = p.itin.size();
    b.itinerary = p.itin;
    b.image_ratio = std::fabs(p.yb - p.ya) / J_.length();
    covered_ += p.b - p.a;
    branches.push_back(std::move(b));
  }

  const PiecewiseMap& m_;
  Interval J_;
  InducedKind kind_;
  std::size_t t_max_;
  InductionConfig cfg_;
  std::priority_queue<Piece, std::vector<Piece>, PieceOrder> queue_;
};

void finish_branches(const PiecewiseMap& m, InducedMap& ind) {
  const Interval& J = ind.base;
  std::sort(ind.branches.begin(), ind.branches.end(),
            [](const InducedBranch& x, const InducedBranch& y) { return x.domain.lo < y.domain.lo; });
  for (std::size_t bi = 0; bi < ind.branches.size(); ++bi) {
    auto& b = ind.branches[bi];
    const double d0 = ind.deriv(bi, b.domain.mid());
    b.orientation = d0 < 0 ? -1 : 1;
    b.min_abs_deriv = kInf;
    b.max_abs_deriv = 0.0;
    for (double t : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double d = std::fabs(ind.deriv(bi, b.domain.lo + t * b.domain.length()));
      b.min_abs_deriv = std::min(b.min_abs_deriv, d);
      b.max_abs_deriv = std::max(b.max_abs_deriv, d);
    }
    for (double t : {0.25, 0.5, 0.75}) {
      double x = b.domain.lo + t * b.domain.length();
      const std::size_t first = ind.kind == InducedKind::FirstReturn ? 1 : 0;
      bool ok = true;
      for (std::size_t j = 0; j < b.time && ok; ++j) {
        if (j >= first && inside_open(J, x, 0.0)) ok = false;
        x = m.step(x);
        if (std::isnan(x)) ok = false;
      }
      if (ok && !(x >= J.lo - 1e-9 && x <= J.hi + 1e-9)) ok = false;
      if (!ok) b.probes_ok = false;
    }
    if (!b.probes_ok) ++ind.probe_failures;
    if (!(b.image_ratio >= 1.0 - 1e-6 && b.image_ratio <= 1.0 + 1e-9)) ++ind.markov_failures;
  }
}

}  // namespace

InducedMap first_entry(const PiecewiseMap& m, const Interval& T, const Interval& J, std::size_t t_max,
                       const InductionConfig& cfg) {
  if (!(J.lo < J.hi) || !T.contains(J) || !m.ambient().contains(T))
    throw PreconditionError("first_entry: need J inside T inside the ambient interval");
  if (t_max > 100000) throw PreconditionError("first_entry: t_max must be <= 1e5");
  Discovery d(m, J, InducedKind::FirstEntry, t_max, cfg);
  d.seed_entry(T);
  d.run(T.length());
  InducedMap ind;
  ind.map = std::make_shared<const PiecewiseMap>(m);
  ind.kind = InducedKind::FirstEntry;
  ind.source = T;
  ind.base = J;
  ind.branches = std::move(d.branches);
  ind.truncation = t_max;
  ind.coverage = d.covered_ / T.length();
  ind.cylinders = d.cylinders_;
  finish_branches(m, ind);
  return ind;
}

InducedMap first_return(const PiecewiseMap& m, const Interval& J, std::size_t t_max, const InductionConfig& cfg) {
  if (!(J.lo < J.hi) || !m.ambient().contains(J)) throw PreconditionError("first_return: J must be a subinterval");
  if (t_max > 100000) throw PreconditionError("first_return: t_max must be <= 1e5");
  Discovery d(m, J, InducedKind::FirstReturn, t_max, cfg);
  d.seed_return();
  d.run(J.length());
  InducedMap ind;
  ind.map = std::make_shared<const PiecewiseMap>(m);
  ind.kind = InducedKind::FirstReturn;
  ind.source = J;
  ind.base = J;
  ind.branches = std::move(d.branches);
  ind.truncation = t_max;
  ind.coverage = d.covered_ / J.length();
  ind.cylinders = d.cylinders_;
  finish_branches(m, ind);
  return ind;
}

// ---------------------------------------------------------------------------
// Distortion

double nonlinearity(const PiecewiseMap& m) { return validate_nonflat(m, 1000).max_nonlinearity; }

namespace {

// Interval image of [u, v] under f, or nullopt when [u, v] straddles C_f.
std::optional<Interval> image_of(const PiecewiseMap& m, const Interval& I) {
  const auto& br = m.branches();
  for (std::size_t j = 0; j < br.size(); ++j) {
    if (br[j].domain.lo <= I.lo && I.hi <= br[j].domain.hi) {
      const double a = m.eval_branch(j, I.lo), b = m.eval_branch(j, I.hi);
      return Interval{std::min(a, b), std::max(a, b)};
    }
  }
  return std::nullopt;
}

}  // namespace

double distortion_bound(const PiecewiseMap& m, const Interval& T0, const Interval& J0, std::size_t n) {
  if (!(J0.lo < J0.hi) || !T0.contains(J0) || !m.ambient().contains(T0))
    throw PreconditionError("distortion_bound: need J0 inside T0 inside the ambient interval");
  Interval T = T0, J = J0;
  double eps = T0.length(), sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += J.length();
    auto nt = image_of(m, T);
    auto nj = image_of(m, J);
    if (!nt || !nj) throw NotDiffeomorphic("f^n is not a diffeomorphism on T0: an iterate meets the exceptional set");
    T = *nt;
    J = *nj;
    eps = std::max(eps, T.length());
  }
  // Probe scan: the probe order must be kept (or reversed) at every step.
  constexpr int kProbes = 64;
  std::vector<double> xs(kProbes);
  for (int k = 0; k < kProbes; ++k) xs[k] = T0.lo + (k + 0.5) * T0.length() / kProbes;
  for (std::size_t j = 0; j < n; ++j) {
    for (auto& x : xs) {
      x = m.step(x);
      if (std::isnan(x)) throw NotDiffeomorphic("probe orbit hit the exceptional set");
    }
    const bool inc = xs[1] > xs[0];
    for (int k = 1; k < kProbes; ++k)
      if ((xs[k] > xs[k - 1]) != inc || xs[k] == xs[k - 1]) throw NotDiffeomorphic("f^n is not monotone on T0");
  }
  const double space = std::min(J.lo - T.lo, T.hi - J.hi);
  if (!(space > 0.0)) return kInf;
  const double delta = space / J.length();
  const double O = eps * nonlinearity(m);
  return std::pow((1.0 + delta) / delta, 2) * std::exp(O * sum);
}

double measured_distortion(const PiecewiseMap& m, const Interval& J0, std::size_t n, std::size_t probes) {
  if (probes < 2) throw PreconditionError("measured_distortion: need at least 2 probes");
  double lo = kInf, hi = -kInf;
  for (std::size_t k = 0; k < probes; ++k) {
    const double x = J0.lo + (static_cast<double>(k) + 0.5) * J0.length() / static_cast<double>(probes);
    const double l = deriv_product(m, x, n).log_abs;
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  return std::exp(hi - lo);
}

double measure_distortion(const InducedMap& ind, std::size_t probes) {
  if (probes < 2) throw PreconditionError("measure_distortion: need at least 2 probes");
  double worst = 1.0;
  for (std::size_t b = 0; b < ind.branches.size(); ++b) {
    const Interval& D = ind.branches[b].domain;
    double lo = kInf, hi = 0.0;
    for (std::size_t k = 0; k < probes; ++k) {
      const double x = D.lo + (static_cast<double>(k) + 0.5) * D.length() / static_cast<double>(probes);
      const double d = std::fabs(ind.deriv(b, x));
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    if (lo > 0.0) worst = std::max(worst, hi / lo);
  }
  return worst;
}

}  // namespace pwdyn

#include "pwdyn/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "pwdyn/error.hpp"

namespace pwdyn {

const char* to_string(AttractorKind k) noexcept {
  switch (k) {
    case AttractorKind::PeriodicLike: return "periodic_like";
    case AttractorKind::IntervalCycle: return "interval_cycle";
    case AttractorKind::Cantor: return "cantor";
    case AttractorKind::Unresolved: return "unresolved";
  }
  return "?";
}

double hausdorff(const Interval& a, const Interval& b) noexcept {
  return std::max(std::fabs(a.lo - b.lo), std::fabs(a.hi - b.hi));
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Bins present in at least half of the member covers. Transient bins of
// single samples drop out; a union would accumulate them.
IntervalCover majority_cover(const PiecewiseMap& m, const std::vector<const IntervalCover*>& covers, double res) {
  CoverBuilder b(m.ambient(), res);
  std::vector<std::uint32_t> votes(b.bins.size(), 0);
  const double lo = m.ambient().lo;
  for (const IntervalCover* c : covers) {
    for (const Interval& cell : c->cells) {
      auto i0 = static_cast<std::size_t>(std::llround((cell.lo - lo) / res));
      auto i1 = static_cast<std::size_t>(std::ceil((cell.hi - lo) / res - 1e-9));
      i1 = std::min(i1, votes.size());
      for (std::size_t i = i0; i < i1; ++i) ++votes[i];
    }
  }
  const std::size_t need = (covers.size() + 1) / 2;
  for (std::size_t i = 0; i < votes.size(); ++i) b.bins[i] = votes[i] >= need ? 1 : 0;
  return b.finish();
}

double max_abs_deriv(const PiecewiseMap& m) {
  double L = 0.0;
  for (std::size_t i = 0; i < m.branches().size(); ++i) {
    const Interval& d = m.branches()[i].domain;
    for (int j = 0; j < 512; ++j) {
      const double x = d.lo + d.length() * (j + 0.5) / 512.0;
      const double v = std::fabs(m.deriv_branch(i, x));
      if (std::isfinite(v)) L = std::max(L, v);
    }
  }
  return L;
}

// Hull of f over a closed cell; exceptional sample points contribute both
// lateral limits.
Interval image_hull(const PiecewiseMap& m, const Interval& cell, double res) {
  const auto n = static_cast<std::size_t>(std::clamp(20.0 * cell.length() / res, 1000.0, 1e5));
  double lo = INFINITY, hi = -INFINITY;
  auto take = [&](double y) {
    if (std::isfinite(y)) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  };
  const Interval& amb = m.ambient();
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = cell.lo + cell.length() * static_cast<double>(j) / static_cast<double>(n);
    const double y = m.step(x);
    if (!std::isnan(y)) {
      take(y);
      continue;
    }
    if (x > amb.lo) take(m.eval_lateral({x, Side::Left}));
    if (x < amb.hi) take(m.eval_lateral({x, Side::Right}));
  }
  return {lo, hi};
}

// f-permutation of the cells as one cycle; returns the cycle length or 0.
std::size_t permutation_cycle(const PiecewiseMap& m, const std::vector<Interval>& cells, double res, double tol) {
  const std::size_t k = cells.size();
  std::vector<std::size_t> sigma(k, k);
  std::vector<bool> hit(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    const Interval img = image_hull(m, cells[i], res);
    for (std::size_t j = 0; j < k; ++j) {
      if (hausdorff(img, cells[j]) <= tol) {
        sigma[i] = j;
        break;
      }
    }
    if (sigma[i] == k || hit[sigma[i]]) return 0;
    hit[sigma[i]] = true;
  }
  std::size_t len = 0, i = 0;
  do {
    i = sigma[i];
    ++len;
  } while (i != 0 && len <= k);
  return len == k ? k : 0;
}

bool same_cycle(const TailMatch& a, const TailMatch& b) {
  if (a.period != b.period) return false;
  for (std::size_t i = 0; i < a.orbit.size(); ++i)
    if (std::fabs(a.orbit[i] - b.orbit[i]) > 1e-6) return false;
  return true;
}

}  // namespace

IntervalCover critical_orbit_cover(const PiecewiseMap& m, const LateralPoint& v, std::size_t length,
                                   double resolution) {
  CoverBuilder b(m.ambient(), resolution);
  b.add(v.point);
  double x = m.eval_lateral(v);
  for (std::size_t i = 0; i < length && !std::isnan(x); ++i) {
    b.add(x);
    x = m.step(x);
  }
  return b.finish();
}

OmegaMatch match_omega(const IntervalCover& cover, const PiecewiseMap& m, const ClassifyConfig& cfg) {
  if (cover.empty()) throw PreconditionError("match_omega: empty cover");
  const double res = cover.resolution;
  OmegaMatch out;
  out.symmetric_difference = INFINITY;

  std::vector<LateralPoint> near;
  for (const LateralValue& lv : m.lateral_values()) {
    const double c = lv.at.point;
    if (cover.contains(c) || cover.contains(c - res) || cover.contains(c + res)) near.push_back(lv.at);
  }
  if (near.empty()) return out;

  std::vector<IntervalCover> orbit_covers;
  for (const LateralPoint& v : near) orbit_covers.push_back(critical_orbit_cover(m, v, cfg.critical_length, res));

  // All nonempty subsets, largest first; the full candidate set is the
  // natural answer, subsets catch one-sided accumulation.
  const std::size_t n = near.size();
  if (n > 16) throw PreconditionError("match_omega: too many critical points near the cover");
  std::vector<std::uint32_t> masks;
  for (std::uint32_t s = 1; s < (1u << n); ++s) masks.push_back(s);
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });
  for (std::uint32_t s : masks) {
    IntervalCover u;
    u.resolution = res;
    for (std::size_t i = 0; i < n; ++i)
      if (s & (1u << i)) u = cover_union(u, orbit_covers[i]);
    ++out.candidates;
    const double d = symmetric_difference(u, cover);
    if (d < out.symmetric_difference) out.symmetric_difference = d;
    if (d <= 5.0 * res) {
      out.accepted = true;
      out.symmetric_difference = d;
      out.V.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (s & (1u << i)) out.V.push_back(near[i]);
      return out;
    }
  }
  return out;
}

bool recurrence_check(const PiecewiseMap& m, const LateralPoint& v, std::size_t length, double eps) {
  if (length < 10000) throw PreconditionError("recurrence_check: length must be >= 1e4");
  double x = m.eval_lateral(v);
  if (x == v.point) return true;
  const std::size_t burn = length / 10;
  std::size_t returns = 0;
  for (std::size_t i = 0; i < length; ++i) {
    if (i >= burn && std::fabs(x - v.point) < eps && ++returns >= 3) return true;
    const double y = m.step(x);
    if (std::isnan(y)) {
      if (i < burn) throw DegenerateOrbit("recurrence_check: orbit hits C_f during burn-in");
      break;
    }
    x = y;
  }
  return false;
}

CriticalOrder critical_order(const PiecewiseMap& m, std::size_t horizon, double resolution) {
  if (horizon < 10000) throw PreconditionError("critical_order: horizon must be >= 1e4");
  CriticalOrder out;
  out.values = m.lateral_values();
  const std::size_t n = out.values.size();
  std::vector<IntervalCover> omega(n);
  for (std::size_t b = 0; b < n; ++b) {
    try {
      omega[b] = omega_cover(m, out.values[b].value, horizon / 10, horizon, resolution);
    } catch (const DegenerateOrbit&) {
      omega[b] = IntervalCover{resolution, {}};
    }
  }
  out.in_omega.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    const double x = out.values[a].value;
    for (std::size_t b = 0; b < n; ++b)
      out.in_omega[a][b] = omega[b].contains(x) || omega[b].contains(x - resolution) ||
                           omega[b].contains(x + resolution);
  }
  std::vector<bool> dominated(n, false);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && out.in_omega[a][b] && !out.in_omega[b][a]) {
        out.precedes.emplace_back(a, b);
        dominated[a] = true;
      }
  for (std::size_t a = 0; a < n; ++a)
    if (!dominated[a]) out.maximal.push_back(a);
  return out;
}

Classification classify_attractors(const PiecewiseMap& m, const ClassifyConfig& cfg) {
  if (cfg.samples < 100) throw PreconditionError("classify_attractors: samples must be >= 100");
  BasinConfig bc;
  bc.burn_in = cfg.burn_in;
  bc.length = cfg.length;
  bc.resolution = cfg.resolution;
  bc.noise = cfg.noise;
  bc.threads = cfg.threads;
  const std::vector<RawPointRecord> recs = basin_sample(m, cfg.samples, cfg.seed, bc);
  const double res = cfg.resolution;
  const double total = static_cast<double>(cfg.samples);

  Classification out;
  out.samples = cfg.samples;

  // Periodic-like groups.
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> rest;
  std::size_t unclassified = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const RawPointRecord& r = recs[i];
    if (r.matched) {
      bool placed = false;
      for (auto& g : groups)
        if (same_cycle(*recs[g.front()].matched, *r.matched)) {
          g.push_back(i);
          placed = true;
          break;
        }
      if (!placed) groups.push_back({i});
    } else if (r.terminated_at_exceptional || r.cover.empty()) {
      ++unclassified;
    } else {
      rest.push_back(i);
    }
  }

  auto covers_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<const IntervalCover*> v;
    for (std::size_t i : idx) v.push_back(&recs[i].cover);
    return v;
  };

  std::vector<AttractorReport> periodic;
  for (const auto& g : groups) {
    AttractorReport rep;
    rep.kind = AttractorKind::PeriodicLike;
    rep.sample_indices = g;
    const TailMatch& t = *recs[g.front()].matched;
    rep.periodic = PeriodicAttractor{t.orbit, t.period, t.multiplier, t.lateral};
    periodic.push_back(std::move(rep));
  }

  // Cluster the remaining covers; sorting by measure bounds the pairs to test
  // since |meas a - meas b| <= symdiff(a, b).
  std::vector<std::size_t> order(rest.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> meas(rest.size());
  for (std::size_t k = 0; k < rest.size(); ++k) meas[k] = recs[rest[k]].cover.measure();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return meas[a] < meas[b]; });
  UnionFind uf(rest.size());
  for (std::size_t p = 0; p < order.size(); ++p)
    for (std::size_t q = p + 1; q < order.size() && meas[order[q]] - meas[order[p]] <= 2.0 * res; ++q) {
      const std::size_t a = order[p], b = order[q];
      if (uf.find(a) == uf.find(b)) continue;
      if (symmetric_difference(recs[rest[a]].cover, recs[rest[b]].cover) <= 2.0 * res) uf.unite(a, b);
    }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t k = 0; k < rest.size(); ++k) clusters[uf.find(k)].push_back(rest[k]);

  for (auto& rep : periodic) rep.cover = majority_cover(m, covers_of(rep.sample_indices), res);

  const double tol = std::max(1e-3, max_abs_deriv(m) * res);
  const std::size_t max_cells = 2 * m.exceptional().size() + 2;
  std::vector<AttractorReport> others;
  for (auto& [root, members] : clusters) {
    (void)root;
    IntervalCover cover = majority_cover(m, covers_of(members), res);
    if (cover.empty()) cover = recs[members.front()].cover;

    // Unmatched samples that sit on a periodic-like attractor's cover join it.
    bool merged = false;
    for (auto& p : periodic)
      if (symmetric_difference(p.cover, cover) <= 2.0 * res) {
        p.sample_indices.insert(p.sample_indices.end(), members.begin(), members.end());
        merged = true;
        break;
      }
    if (merged) continue;

    AttractorReport rep;
    rep.sample_indices = members;
    rep.cover = cover;
    const bool fat = std::all_of(cover.cells.begin(), cover.cells.end(),
                                 [&](const Interval& c) { return c.length() >= 100.0 * res; });
    std::size_t cycle = 0;
    if (cover.cells.size() <= max_cells && fat) cycle = permutation_cycle(m, cover.cells, res, tol);
    if (cycle > 0) {
      rep.kind = AttractorKind::IntervalCycle;
      rep.intervals = cover.cells;
      rep.cycle_period = cycle;
    } else {
      const OmegaMatch om = match_omega(cover, m, cfg);
      rep.match_distance = om.symmetric_difference;
      if (!om.accepted) {
        rep.note = om.candidates == 0 ? "cover avoids C_f" : "no critical-orbit union matches the cover";
      } else if (cover.max_cell() > 10.0 * res) {
        rep.note = "matched critical orbits but the cover has interior";
        rep.matched = om.V;
      } else {
        rep.matched = om.V;
        bool all = true;
        for (const LateralPoint& v : om.V) {
          bool ok = false;
          try {
            ok = recurrence_check(m, v, cfg.recurrence_length, res);
          } catch (const DegenerateOrbit&) {
          }
          rep.recurrent.push_back(ok);
          all = all && ok;
        }
        if (all) rep.kind = AttractorKind::Cantor;
        else rep.note = "matched critical value is not recurrent";
      }
      if (rep.kind == AttractorKind::Unresolved && fat && cover.cells.size() <= max_cells)
        rep.note += "; cells are not permuted by f";
    }
    others.push_back(std::move(rep));
  }

  for (auto& rep : periodic) {
    std::sort(rep.sample_indices.begin(), rep.sample_indices.end());
    rep.basin_fraction = static_cast<double>(rep.sample_indices.size()) / total;
    out.reports.push_back(std::move(rep));
  }
  for (auto& rep : others) {
    rep.basin_fraction = static_cast<double>(rep.sample_indices.size()) / total;
    out.reports.push_back(std::move(rep));
  }
  std::stable_sort(out.reports.begin(), out.reports.end(), [](const AttractorReport& a, const AttractorReport& b) {
    if (a.sample_indices.size() != b.sample_indices.size()) return a.sample_indices.size() > b.sample_indices.size();
    return a.sample_indices.front() < b.sample_indices.front();
  });
  out.unclassified_fraction = static_cast<double>(unclassified) / total;
  const std::size_t nc = m.exceptional().size();
  out.report_bound = (nc >= 31 ? static_cast<std::size_t>(-1) / 2 : (std::size_t{1} << (2 * nc)) - 1) + periodic.size();
  return out;
}

}  // namespace pwdyn

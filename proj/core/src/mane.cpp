#include "pwdyn/mane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pwdyn/error.hpp"
#include "pwdyn/parallel.hpp"
#include "pwdyn/rng.hpp"

namespace pwdyn {

const char* to_string(GrowthKind k) noexcept {
  switch (k) {
    case GrowthKind::Growth: return "GROWTH";
    case GrowthKind::Captured: return "CAPTURED";
    case GrowthKind::Bounded: return "BOUNDED";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside_any(const std::vector<Interval>& U, double x) noexcept {
  return std::any_of(U.begin(), U.end(), [x](const Interval& I) { return I.contains_open(x); });
}

// One seeded orbit: the positions, whether each lies in U, and the prefix
// sums of log|Df|.
struct Track {
  std::vector<char> in_u;
  std::vector<double> prefix;  // size positions + 1
};

Track run_track(const PiecewiseMap& m, const std::vector<Interval>& U, std::uint64_t seed, std::size_t index,
                std::size_t steps, double noise) {
  auto g = SplitMix64::stream(seed, index);
  double x = g.uniform(m.ambient().lo, m.ambient().hi);
  NoisyStepper step(m, {noise, g.next()});
  Track t;
  t.prefix.push_back(0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    double d = 0.0;
    if (std::isnan(m.step(x, d)) || !std::isfinite(d) || d == 0.0) break;
    t.in_u.push_back(inside_any(U, x) ? 1 : 0);
    t.prefix.push_back(t.prefix.back() + std::log(std::fabs(d)));
    x = step(x);
    if (std::isnan(x)) break;
  }
  return t;
}

// Calls visit(n, log|Df^n|) for every segment of consecutive positions
// outside U with 1 <= n <= n_max.
template <class Visit>
void for_each_segment(const Track& t, std::size_t n_max, Visit&& visit) {
  const std::size_t T = t.in_u.size();
  std::size_t s = 0;
  while (s < T) {
    if (t.in_u[s]) {
      ++s;
      continue;
    }
    std::size_t e = s;
    while (e < T && !t.in_u[e]) ++e;
    for (std::size_t a = s; a < e; ++a) {
      const std::size_t nn = std::min(n_max, e - a);
      for (std::size_t n = 1; n <= nn; ++n) visit(n, t.prefix[a + n] - t.prefix[a]);
    }
    s = e;
  }
}

}  // namespace

ManeCertificate mane_certificate(const PiecewiseMap& m, const std::vector<Interval>& U, const ManeConfig& cfg) {
  if (cfg.n_max < 2 || cfg.samples == 0 || cfg.orbit_factor == 0)
    throw PreconditionError("mane_certificate: need n_max >= 2, samples >= 1, orbit_factor >= 1");
  for (double c : m.exceptional())
    if (!inside_any(U, c)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "mane_certificate: critical point %.17g is outside U", c);
      throw UNotCovering(buf);
    }

  ManeCertificate cert;
  cert.U = U;
  cert.n_max = cfg.n_max;
  cert.samples = cfg.samples;
  cert.period_checked = cfg.period_max;
  for (const PeriodicPoint& p : find_periodic_points(m, cfg.period_max))
    if (!inside_any(U, p.point) && p.multiplier <= 1.0 + 1e-9) cert.periodic_violations.push_back(p);

  // Per sample, the minimum of log|Df^n| for each n.
  const std::size_t N = cfg.n_max;
  std::vector<std::vector<double>> minlog(cfg.samples);
  std::vector<std::size_t> counts(cfg.samples, 0);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) {
    const Track t = run_track(m, U, cfg.seed, i, cfg.orbit_factor * N, cfg.noise);
    std::vector<double> best(N + 1, kInf);
    std::size_t c = 0;
    for_each_segment(t, N, [&](std::size_t n, double v) {
      best[n] = std::min(best[n], v);
      ++c;
    });
    minlog[i] = std::move(best);
    counts[i] = c;
  });
  std::vector<double> global(N + 1, kInf);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    cert.segments += counts[i];
    for (std::size_t n = 1; n <= N; ++n) global[n] = std::min(global[n], minlog[i][n]);
  }
  for (std::size_t n = 1; n <= N; ++n)
    if (std::isfinite(global[n])) cert.longest_segment = n;
  if (cert.longest_segment == 0) return cert;

  // Long segments fit lambda. When none reaches n_max/2 the cutoff falls back
  // to half the longest segment seen.
  cert.fit_min_length = std::max<std::size_t>(1, cert.longest_segment >= N / 2 ? N / 2 : cert.longest_segment / 2);
  double log_lambda = kInf;
  for (std::size_t n = cert.fit_min_length; n <= N; ++n)
    if (std::isfinite(global[n])) log_lambda = std::min(log_lambda, global[n] / static_cast<double>(n));
  double log_c = kInf;
  for (std::size_t n = 1; n <= N; ++n)
    if (std::isfinite(global[n])) log_c = std::min(log_c, global[n] - static_cast<double>(n) * log_lambda);

  cert.lambda = std::exp(log_lambda);
  cert.C = std::exp(log_c);
  cert.valid = cert.periodic_violations.empty() && cert.lambda > 1.0 && cert.C > 0.0 && std::isfinite(cert.C);
  return cert;
}

double replay_certificate(const PiecewiseMap& m, const ManeCertificate& cert, std::uint64_t seed,
                          std::size_t samples, double noise) {
  const double log_lambda = std::log(cert.lambda), log_c = std::log(cert.C);
  std::vector<std::size_t> ok(samples, 0), total(samples, 0);
  parallel_for(samples, 0, [&](std::size_t i) {
    const Track t = run_track(m, cert.U, seed, i, 4 * cert.n_max, noise);
    for_each_segment(t, cert.n_max, [&](std::size_t n, double v) {
      ++total[i];
      if (v > log_c + static_cast<double>(n) * log_lambda) ++ok[i];
    });
  });
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    a += ok[i];
    b += total[i];
  }
  return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b);
}

GrowthRecord growth_test(const PiecewiseMap& m, double x, const std::vector<Interval>& avoid, std::size_t n_max) {
  if (inside_any(avoid, x)) throw PreconditionError("growth_test: start point lies in the avoid set");
  GrowthRecord r;
  const double log_threshold = std::log(kGrowthThreshold);
  double acc = 0.0, best = 0.0;
  for (std::size_t n = 0; n < n_max; ++n) {
    double d = 0.0;
    const double y = m.step(x, d);
    if (std::isnan(y)) {  // landed on C_f
      r.kind = GrowthKind::Captured;
      r.steps = n;
      r.max_abs_deriv = std::exp(best);
      return r;
    }
    acc += std::log(std::fabs(d));
    best = std::max(best, acc);
    x = y;
    r.steps = n + 1;
    if (best > log_threshold) {
      r.kind = GrowthKind::Growth;
      r.max_abs_deriv = std::exp(best);
      return r;
    }
    if (inside_any(avoid, x)) {
      r.kind = GrowthKind::Captured;
      r.max_abs_deriv = std::exp(best);
      return r;
    }
  }
  r.max_abs_deriv = std::exp(best);
  return r;
}

}  // namespace pwdyn

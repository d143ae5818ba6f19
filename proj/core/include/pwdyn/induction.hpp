#pragma once

// Nice intervals, first-entry / first-return induced Markov maps, and the
// distortion and expansion estimates built on them.

#include <memory>
#include <optional>
#include <vector>

#include "pwdyn/orbit.hpp"
#include "pwdyn/piecewise_map.hpp"

namespace pwdyn {

bool is_nice(const PiecewiseMap& m, const Interval& J, std::size_t horizon);

std::optional<Interval> find_nice_interval(const PiecewiseMap& m, double p, double delta, std::size_t horizon);

enum class InducedKind { FirstEntry, FirstReturn };
const char* to_string(InducedKind k) noexcept;

struct InducedBranch {
  Interval domain;
  std::size_t time = 0;
  int orientation = 1;
  std::vector<std::size_t> itinerary;  // branch of f used at each step
  double image_ratio = 0.0;            // |f^time(domain)| / |J|
  double min_abs_deriv = 0.0;          // over probes
  double max_abs_deriv = 0.0;
  bool probes_ok = true;               // intermediate iterates avoid J, last lands in J
};

struct InducedMap {
  std::shared_ptr<const PiecewiseMap> map;
  InducedKind kind = InducedKind::FirstReturn;
  Interval source;  // T for first entry, J for first return
  Interval base;    // J
  std::vector<InducedBranch> branches;  // sorted by domain
  std::size_t truncation = 0;           // t_max
  double coverage = 0.0;                // covered fraction of |source|
  std::size_t cylinders = 0;            // refinement steps performed
  std::size_t markov_failures = 0;      // branches whose image is not all of J
  std::size_t probe_failures = 0;

  bool full_markov() const noexcept { return markov_failures == 0; }
  // Branch index holding x, or npos.
  std::size_t find(double x) const noexcept;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double apply(std::size_t branch, double x) const noexcept;
  double deriv(std::size_t branch, double x) const noexcept;  // signed DF by the chain rule
};

struct InductionConfig {
  double target_uncovered = 1e-3;  // stop once uncovered mass / |source| drops below this
  double min_piece = 1e-12;        // pieces shorter than this are dropped
  std::size_t soft_budget = 50000;  // refinement steps
  std::size_t max_cylinders = 10'000'000;  // BranchExplosion beyond this
};

InducedMap first_entry(const PiecewiseMap& m, const Interval& T, const Interval& J, std::size_t t_max,
                       const InductionConfig& cfg = {});
InducedMap first_return(const PiecewiseMap& m, const Interval& J, std::size_t t_max, const InductionConfig& cfg = {});

// ((1+d)/d)^2 exp(O(eps) * sum |f^i(J0)|) with O(eps) = eps * max nonlinearity.
double distortion_bound(const PiecewiseMap& m, const Interval& T0, const Interval& J0, std::size_t n);

// sup |Df^n(x) / Df^n(y)| over x, y among `probes` points of J0 (f^n monotone on J0).
double measured_distortion(const PiecewiseMap& m, const Interval& J0, std::size_t n, std::size_t probes);

double measure_distortion(const InducedMap& ind, std::size_t probes = 32);

// Max over the grid of |D^2 f| / |D f|; O(eps) is eps times this.
double nonlinearity(const PiecewiseMap& m);

enum class ExpansionMode { UniformlyExpanding, NeutralCore };
const char* to_string(ExpansionMode m) noexcept;

struct FlankReport {
  Interval I;  // I_j
  Interval Jc; // J_j, connecting piece between I_j and the fixed hull
  double min_return_deriv = 0.0;  // min |D calF_j| over probes
  std::size_t probes = 0;
  std::size_t probes_unreturned = 0;
  double entry_bound = 0.0;       // (1/(eps K)) |I_j| / |J_j|
  double min_entry_deriv = 0.0;   // min G_j' over probes of J_j
  std::size_t entry_probes = 0;
  bool entry_bound_holds = false;
};

struct ExpansionReport {
  double distortion = 1.0;
  double epsilon = 0.0;
  double K = 0.0;
  bool applicable = false;  // epsilon < 1/(6K)
  ExpansionMode mode = ExpansionMode::UniformlyExpanding;
  double min_expansion = 0.0;  // min |DF| (uniform) or min |D calF_l| (neutral)
  bool valid = false;
  // neutral core
  std::optional<Interval> Ip0, Ip, fixed_hull;
  std::vector<FlankReport> flanks;
  std::size_t chosen_flank = 0;
  // distortion constant
  double delta = 0.0;  // space of J inside T
  Interval T;
  double K0 = 0.0;
  double gamma0 = 0.0;
  double gamma = 0.0;
  double Gamma = 0.0;
};

ExpansionReport expansion_analysis(const InducedMap& ind, const PiecewiseMap& m);

// Check of the entry-map lower bound on the one-branch model
// g(x) = x + c (x - a)^2 on [a, b].
struct ToyEntryCheck {
  double epsilon = 0.0;
  double K = 0.0;       // measured sup G'/inf G' over each A_n
  double bound = 0.0;   // (1/(eps K)) |J| / |b - a|
  double min_deriv = 0.0;
  std::size_t branches = 0;
  std::size_t probes = 0;
  bool holds = false;
};
ToyEntryCheck toy_entry_check(double c, double a, double b, std::size_t max_branches = 2000,
                              std::size_t probes_per_branch = 5);

struct PartitionCell {
  Interval domain;
  std::vector<std::size_t> itinerary;  // induced-branch indices, length n+1
  double distortion = 1.0;             // sup/inf |DF^{n+1}| over probes
};

struct Partition {
  std::size_t depth = 0;
  std::vector<PartitionCell> cells;
  std::vector<double> max_diameter;  // per level 0..depth
};

Partition refine_partition(const InducedMap& ind, std::size_t n);

// Cover of the orbit of x under the induced map (with jitter, see OrbitNoise),
// binned on the base interval. Points landing outside the discovered branches
// are advanced by iterating f until they return to the base.
IntervalCover induced_orbit_cover(const InducedMap& ind, double x, std::size_t burn_in, std::size_t length,
                                  double resolution, OrbitNoise noise = {});

}  // namespace pwdyn

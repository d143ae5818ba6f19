#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwdyn/classifier.hpp"
#include "pwdyn/error.hpp"
#include "pwdyn/induction.hpp"
#include "pwdyn/mane.hpp"
#include "pwdyn/serialize.hpp"
#include "pwdyn/svg.hpp"

namespace pwdyn {

namespace {

namespace fs = std::filesystem;

// Configuration problems discovered after parsing (exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string map_path;
  std::string out_dir = ".";
  unsigned threads = 0;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.out_dir + ": " + ec.message());
  return dir;
}

PiecewiseMap load(const Common& c) {
  MapSpec spec = load_map_spec(c.map_path);
  try {
    return build_map(spec);
  } catch (const Error& e) {
    throw ConfigError(c.map_path + ": " + e.what());
  }
}

std::vector<Interval> pairs(const std::vector<double>& v, const char* flag) {
  if (v.empty() || v.size() % 2 != 0) throw ConfigError(std::string(flag) + " expects pairs a,b[,a2,b2...]");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < v.size(); i += 2) {
    if (!(v[i] < v[i + 1])) throw ConfigError(std::string(flag) + ": each pair needs a < b");
    out.push_back({v[i], v[i + 1]});
  }
  return out;
}

std::string csv_double(double x) { return format_double(x); }

// Largest depth <= want with branches^(depth+1) within the refinement cap.
std::size_t feasible_depth(std::size_t branches, std::size_t want) {
  double cells = static_cast<double>(branches);
  std::size_t d = 0;
  while (d < want && cells * static_cast<double>(branches) <= 1e6) {
    cells *= static_cast<double>(branches);
    ++d;
  }
  return d;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise-smooth interval map dynamics: induced maps, attractors, expansion certificates"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (0 = machine parallelism)")->check(CLI::NonNegativeNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--map", common.map_path, "Map definition JSON")->required();
    sub->add_option("--out", common.out_dir, "Output directory");
  };

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Non-flatness check, lateral values, periodic points");
  add_common(analyze);
  std::size_t period_max = 8, grid = 1000;
  analyze->add_option("--period-max", period_max, "Largest period searched")->check(CLI::Range(1, 24));
  analyze->add_option("--grid", grid, "Validation grid size")->check(CLI::Range(100, 10'000'000));

  // classify
  auto* classify = app.add_subcommand("classify", "Sample basins and classify attractors");
  add_common(classify);
  ClassifyConfig ccfg;
  classify->add_option("--samples", ccfg.samples)->check(CLI::Range(100, 10'000'000));
  classify->add_option("--seed", ccfg.seed);
  classify->add_option("--burn-in", ccfg.burn_in);
  classify->add_option("--length", ccfg.length)->check(CLI::Range(1, 10'000'000));
  classify->add_option("--resolution", ccfg.resolution)->check(CLI::Range(1e-6, 1.0));
  std::size_t horizon = 100000;
  classify->add_option("--horizon", horizon, "Orbit length for the critical-value order")->check(CLI::Range(10000, 100'000'000));

  // return-map
  auto* retmap = app.add_subcommand("return-map", "First-return map to J with distortion and expansion analysis");
  add_common(retmap);
  std::vector<double> J;
  std::size_t t_max = 50, depth = 3;
  InductionConfig icfg;
  retmap->add_option("--J", J, "Base interval a,b")->delimiter(',')->required()->expected(2);
  retmap->add_option("--t-max", t_max)->check(CLI::Range(1, 100000));
  retmap->add_option("--depth", depth, "Refinement depth (capped so cells stay <= 1e6)")->check(CLI::Range(0, 8));
  retmap->add_option("--target", icfg.target_uncovered, "Stop once this fraction of J is uncovered")->check(CLI::Range(1e-12, 1.0));
  retmap->add_option("--budget", icfg.soft_budget, "Refinement step budget");

  // mane
  auto* mane = app.add_subcommand("mane", "Uniform expansion certificate outside U");
  add_common(mane);
  std::vector<double> avoid;
  ManeConfig mcfg;
  mane->add_option("--avoid", avoid, "U as a,b[,a2,b2...]")->delimiter(',')->required();
  mane->add_option("--period-max", mcfg.period_max)->check(CLI::Range(1, 24));
  mane->add_option("--samples", mcfg.samples)->check(CLI::Range(1, 10'000'000));
  mane->add_option("--nmax", mcfg.n_max)->check(CLI::Range(2, 100000));
  mane->add_option("--seed", mcfg.seed);

  // plot
  auto* plot = app.add_subcommand("plot", "Cobweb diagram and orbit table");
  add_common(plot);
  double x0 = 0.0;
  std::size_t steps = 100;
  plot->add_option("--x", x0, "Starting point")->required();
  plot->add_option("--n", steps, "Number of steps")->check(CLI::Range(1, 10'000'000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const PiecewiseMap m = load(common);
    const fs::path dir = prepare_out(common);

    if (*analyze) {
      Json j;
      j["map"] = to_json(m.spec());
      j["exceptional"] = m.exceptional();
      Json lv = Json::array();
      for (const LateralValue& v : m.lateral_values()) lv.push_back(Json{{"at", to_json(v.at)}, {"value", v.value}});
      j["lateral_values"] = lv;
      j["validation"] = to_json(validate_nonflat(m, grid));
      Json pp = Json::array();
      for (const PeriodicPoint& p : find_periodic_points(m, period_max)) pp.push_back(to_json(p));
      j["period_max"] = period_max;
      j["periodic_points"] = pp;
      Json pl = Json::array();
      for (const LateralValue& v : m.lateral_values())
        if (auto p = detect_periodic_like(m, v.at)) pl.push_back(to_json(*p));
      j["periodic_like"] = pl;
      write_file(dir / "report.json", dump(j));
    } else if (*classify) {
      ccfg.threads = common.threads;
      const Classification c = classify_attractors(m, ccfg);
      Json j;
      j["map"] = to_json(m.spec());
      j["config"] = Json{{"samples", ccfg.samples}, {"seed", ccfg.seed},       {"burn_in", ccfg.burn_in},
                         {"length", ccfg.length},   {"resolution", ccfg.resolution}, {"horizon", horizon}};
      j["classification"] = to_json(c);
      j["critical_order"] = to_json(critical_order(m, horizon, ccfg.resolution));
      write_file(dir / "report.json", dump(j));
      std::vector<std::pair<std::string, IntervalCover>> strips;
      for (std::size_t i = 0; i < c.reports.size(); ++i) {
        char label[64];
        std::snprintf(label, sizeof label, "#%zu %s %.3f", i, to_string(c.reports[i].kind), c.reports[i].basin_fraction);
        strips.emplace_back(label, c.reports[i].cover);
      }
      write_file(dir / "cover.svg", svg_cover_strips(m.ambient(), strips));
      out << c.reports.size() << " attractor(s)\n";
    } else if (*retmap) {
      const Interval base{J[0], J[1]};
      if (!(base.lo < base.hi)) throw ConfigError("--J needs a < b");
      const InducedMap ind = first_return(m, base, t_max, icfg);
      Json j;
      j["map"] = to_json(m.spec());
      j["nice"] = is_nice(m, base, 1000);
      j["measured_distortion"] = measure_distortion(ind);
      try {
        j["expansion"] = to_json(expansion_analysis(ind, m));
      } catch (const NeutralCoreNotBracketable& e) {
        j["expansion"] = Json{{"error", e.what()}};
      }
      const std::size_t d = feasible_depth(ind.branches.size(), depth);
      j["partition"] = ind.branches.empty() ? Json(nullptr) : to_json(refine_partition(ind, d));
      j["induced"] = to_json(ind);
      write_file(dir / "report.json", dump(j));
      std::string csv = "lo,hi,time,orientation,min_abs_deriv,max_abs_deriv\n";
      for (const InducedBranch& b : ind.branches)
        csv += csv_double(b.domain.lo) + "," + csv_double(b.domain.hi) + "," + std::to_string(b.time) + "," +
               std::to_string(b.orientation) + "," + csv_double(b.min_abs_deriv) + "," + csv_double(b.max_abs_deriv) +
               "\n";
      write_file(dir / "branches.csv", csv);
      write_file(dir / "return_map.svg", svg_return_map(ind));
      out << ind.branches.size() << " branches, coverage " << ind.coverage << "\n";
    } else if (*mane) {
      mcfg.threads = common.threads;
      const ManeCertificate cert = mane_certificate(m, pairs(avoid, "--avoid"), mcfg);
      Json j = to_json(cert);
      j["seed"] = mcfg.seed;
      write_file(dir / "certificate.json", dump(j));
      out << (cert.valid ? "valid" : "invalid") << " certificate\n";
    } else if (*plot) {
      if (!m.ambient().contains_closed(x0)) throw ConfigError("--x lies outside the ambient interval");
      write_file(dir / "cobweb.svg", svg_cobweb(m, x0, steps));
      std::string csv = "n,x,log_abs_deriv\n";
      const OrbitSegment seg = orbit(m, x0, steps);
      csv += "0," + csv_double(x0) + ",0\n";
      for (std::size_t i = 0; i < seg.iterates.size(); ++i)
        csv += std::to_string(i + 1) + "," + csv_double(seg.iterates[i]) + "," +
               csv_double(seg.log_deriv_prefix[i + 1]) + "\n";
      write_file(dir / "orbit.csv", csv);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UNotCovering& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace pwdyn

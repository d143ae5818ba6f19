#include "pwdyn/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pwdyn/error.hpp"

namespace pwdyn {

namespace {

Interval parse_pair(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw PreconditionError(std::string("map definition: ") + what + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json num(double x) { return Json(x); }

Json intervals(const std::vector<Interval>& v) {
  Json a = Json::array();
  for (const Interval& i : v) a.push_back(to_json(i));
  return a;
}

Json opt_interval(const std::optional<Interval>& i) { return i ? to_json(*i) : Json(nullptr); }

void write_string(std::string& out, const std::string& s) {
  // nlohmann handles escaping; reuse it for a lone string.
  out += Json(s).dump();
}

void write(std::string& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(out, it.key());
        out += ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(out, j[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump(const Json& j) {
  std::string out;
  write(out, j, 0);
  out += '\n';
  return out;
}

MapSpec parse_map_spec(const Json& j) {
  if (!j.is_object()) throw PreconditionError("map definition: top level must be an object");
  MapSpec s;
  if (!j.contains("ambient")) throw PreconditionError("map definition: missing \"ambient\"");
  s.ambient = parse_pair(j["ambient"], "ambient");
  if (!j.contains("branches") || !j["branches"].is_array())
    throw PreconditionError("map definition: \"branches\" must be an array");
  for (const auto& b : j["branches"]) {
    if (!b.is_object() || !b.contains("domain") || !b.contains("expr") || !b["expr"].is_string())
      throw PreconditionError("map definition: each branch needs \"domain\" and \"expr\"");
    s.branches.push_back({parse_pair(b["domain"], "domain"), b["expr"].get<std::string>()});
  }
  if (j.contains("regular_joints")) {
    if (!j["regular_joints"].is_array()) throw PreconditionError("map definition: \"regular_joints\" must be an array");
    for (const auto& x : j["regular_joints"]) {
      if (!x.is_number()) throw PreconditionError("map definition: regular joints must be numbers");
      s.regular_joints.push_back(x.get<double>());
    }
  }
  return s;
}

MapSpec load_map_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open map file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PreconditionError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_map_spec(j);
}

Json to_json(const MapSpec& s) {
  Json j;
  j["ambient"] = to_json(s.ambient);
  Json b = Json::array();
  for (const BranchSpec& br : s.branches) b.push_back(Json{{"domain", to_json(br.domain)}, {"expr", br.expr}});
  j["branches"] = b;
  if (!s.regular_joints.empty()) j["regular_joints"] = s.regular_joints;
  return j;
}

Json to_json(const Interval& i) { return Json::array({num(i.lo), num(i.hi)}); }

Json to_json(const LateralPoint& p) { return Json{{"point", num(p.point)}, {"side", to_string(p.side)}}; }

Json to_json(const IntervalCover& c) {
  return Json{{"resolution", num(c.resolution)}, {"measure", num(c.measure())}, {"cells", intervals(c.cells)}};
}

Json to_json(const ValidationReport& r) {
  Json j;
  j["grid_size"] = r.grid_size;
  Json b = Json::array();
  for (const auto& d : r.branches)
    b.push_back(Json{{"domain", to_json(d.domain)},
                     {"min_abs_deriv", num(d.min_abs_deriv)},
                     {"nonlinearity", num(d.nonlinearity)}});
  j["branches"] = b;
  Json o = Json::array();
  for (const auto& lo : r.orders)
    o.push_back(Json{{"point", num(lo.point)}, {"left", num(lo.left)}, {"right", num(lo.right)}});
  j["orders"] = o;
  Json f = Json::array();
  for (const auto& p : r.flat_violations) f.push_back(to_json(p));
  j["flat_violations"] = f;
  j["max_nonlinearity"] = num(r.max_nonlinearity);
  j["ok"] = r.ok();
  return j;
}

Json to_json(const PeriodicPoint& p) {
  return Json{{"point", num(p.point)}, {"period", p.period}, {"multiplier", num(p.multiplier)}};
}

Json to_json(const PeriodicLike& p) {
  return Json{{"point", to_json(p.point)},
              {"period", p.period},
              {"lateral_multiplier", num(p.lateral_multiplier)},
              {"attracting", p.attracting}};
}

Json to_json(const RawPointRecord& r) {
  Json j;
  j["index"] = r.index;
  j["x0"] = num(r.x0);
  j["cover"] = to_json(r.cover);
  if (r.matched) {
    Json m;
    m["orbit"] = r.matched->orbit;
    m["period"] = r.matched->period;
    m["multiplier"] = num(r.matched->multiplier);
    m["lateral"] = r.matched->lateral ? to_json(*r.matched->lateral) : Json(nullptr);
    j["matched"] = m;
  } else {
    j["matched"] = nullptr;
  }
  j["min_dist_to_exceptional"] = num(r.min_dist_to_exceptional);
  j["terminated_at_exceptional"] = r.terminated_at_exceptional ? Json(*r.terminated_at_exceptional) : Json(nullptr);
  return j;
}

Json to_json(const InducedMap& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  j["source"] = to_json(m.source);
  j["base"] = to_json(m.base);
  j["truncation"] = m.truncation;
  j["coverage"] = num(m.coverage);
  j["cylinders"] = m.cylinders;
  j["branch_count"] = m.branches.size();
  j["markov_failures"] = m.markov_failures;
  j["probe_failures"] = m.probe_failures;
  j["full_markov"] = m.full_markov();
  Json b = Json::array();
  for (const InducedBranch& br : m.branches)
    b.push_back(Json{{"domain", to_json(br.domain)},
                     {"time", br.time},
                     {"orientation", br.orientation},
                     {"image_ratio", num(br.image_ratio)},
                     {"min_abs_deriv", num(br.min_abs_deriv)},
                     {"max_abs_deriv", num(br.max_abs_deriv)}});
  j["branches"] = b;
  return j;
}

Json to_json(const ExpansionReport& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  j["distortion"] = num(r.distortion);
  j["epsilon"] = num(r.epsilon);
  j["K"] = num(r.K);
  j["applicable"] = r.applicable;
  j["min_expansion"] = num(r.min_expansion);
  j["valid"] = r.valid;
  j["Ip0"] = opt_interval(r.Ip0);
  j["Ip"] = opt_interval(r.Ip);
  j["fixed_hull"] = opt_interval(r.fixed_hull);
  Json f = Json::array();
  for (const FlankReport& fl : r.flanks)
    f.push_back(Json{{"I", to_json(fl.I)},
                     {"J", to_json(fl.Jc)},
                     {"min_return_deriv", num(fl.min_return_deriv)},
                     {"probes", fl.probes},
                     {"probes_unreturned", fl.probes_unreturned},
                     {"entry_bound", num(fl.entry_bound)},
                     {"min_entry_deriv", num(fl.min_entry_deriv)},
                     {"entry_probes", fl.entry_probes},
                     {"entry_bound_holds", fl.entry_bound_holds}});
  j["flanks"] = f;
  j["chosen_flank"] = r.flanks.empty() ? Json(nullptr) : Json(r.chosen_flank);
  j["delta"] = num(r.delta);
  j["T"] = to_json(r.T);
  j["K0"] = num(r.K0);
  j["gamma0"] = num(r.gamma0);
  j["gamma"] = num(r.gamma);
  j["Gamma"] = num(r.Gamma);
  return j;
}

Json to_json(const Partition& p) {
  Json j;
  j["depth"] = p.depth;
  j["cells"] = p.cells.size();
  j["max_diameter"] = p.max_diameter;
  double worst = 1.0;
  for (const PartitionCell& c : p.cells) worst = std::max(worst, c.distortion);
  j["max_distortion"] = num(worst);
  return j;
}

Json to_json(const AttractorReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["basin_fraction"] = num(r.basin_fraction);
  j["samples"] = r.sample_indices.size();
  if (r.periodic) {
    j["periodic"] = Json{{"orbit", r.periodic->orbit},
                         {"period", r.periodic->period},
                         {"multiplier", num(r.periodic->multiplier)},
                         {"lateral", r.periodic->lateral ? to_json(*r.periodic->lateral) : Json(nullptr)}};
  }
  if (r.kind == AttractorKind::IntervalCycle) {
    j["intervals"] = intervals(r.intervals);
    j["cycle_period"] = r.cycle_period;
  }
  if (!r.matched.empty()) {
    Json v = Json::array();
    for (std::size_t i = 0; i < r.matched.size(); ++i) {
      Json e = to_json(r.matched[i]);
      e["recurrent"] = i < r.recurrent.size() ? Json(static_cast<bool>(r.recurrent[i])) : Json(nullptr);
      v.push_back(e);
    }
    j["matched"] = v;
  }
  if (r.kind == AttractorKind::Cantor || r.kind == AttractorKind::Unresolved) j["match_distance"] = num(r.match_distance);
  if (!r.note.empty()) j["note"] = r.note;
  j["cover"] = to_json(r.cover);
  j["sample_indices"] = r.sample_indices;
  return j;
}

Json to_json(const Classification& c) {
  Json j;
  j["samples"] = c.samples;
  j["unclassified_fraction"] = num(c.unclassified_fraction);
  j["report_bound"] = c.report_bound;
  Json a = Json::array();
  for (const AttractorReport& r : c.reports) a.push_back(to_json(r));
  j["attractors"] = a;
  return j;
}

Json to_json(const CriticalOrder& o) {
  Json j;
  Json v = Json::array();
  for (const LateralValue& lv : o.values) v.push_back(Json{{"at", to_json(lv.at)}, {"value", num(lv.value)}});
  j["values"] = v;
  Json in = Json::array();
  for (const auto& row : o.in_omega) {
    Json r = Json::array();
    for (bool b : row) r.push_back(b);
    in.push_back(r);
  }
  j["in_omega"] = in;
  Json p = Json::array();
  for (const auto& [a, b] : o.precedes) p.push_back(Json::array({a, b}));
  j["precedes"] = p;
  j["maximal"] = o.maximal;
  return j;
}

Json to_json(const ManeCertificate& c) {
  Json j;
  j["U"] = intervals(c.U);
  j["period_checked"] = c.period_checked;
  Json v = Json::array();
  for (const PeriodicPoint& p : c.periodic_violations) v.push_back(to_json(p));
  j["periodic_violations"] = v;
  j["C"] = num(c.C);
  j["lambda"] = num(c.lambda);
  j["n_max"] = c.n_max;
  j["samples"] = c.samples;
  j["segments"] = c.segments;
  j["longest_segment"] = c.longest_segment;
  j["fit_min_length"] = c.fit_min_length;
  j["valid"] = c.valid;
  return j;
}

Json to_json(const GrowthRecord& g) {
  return Json{{"kind", to_string(g.kind)}, {"max_abs_deriv", num(g.max_abs_deriv)}, {"steps", g.steps}};
}

}  // namespace pwdyn

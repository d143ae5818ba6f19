#pragma once

// JSON for map definitions and reports. Key order is fixed by construction
// (ordered_json) and dump() prints doubles with 17 significant digits, so
// equal inputs give byte-identical files.

#include <string>

#include <nlohmann/json.hpp>

#include "pwdyn/classifier.hpp"
#include "pwdyn/induction.hpp"
#include "pwdyn/mane.hpp"

namespace pwdyn {

using Json = nlohmann::ordered_json;

// {"ambient": [lo, hi], "branches": [{"domain": [a, b], "expr": "..."}],
//  "regular_joints": [...]}; the last key is optional.
MapSpec parse_map_spec(const Json& j);
MapSpec load_map_spec(const std::string& path);  // throws PreconditionError naming the path
Json to_json(const MapSpec& s);

Json to_json(const Interval& i);
Json to_json(const LateralPoint& p);
Json to_json(const IntervalCover& c);
Json to_json(const ValidationReport& r);
Json to_json(const PeriodicPoint& p);
Json to_json(const PeriodicLike& p);
Json to_json(const RawPointRecord& r);
Json to_json(const InducedMap& m);
Json to_json(const ExpansionReport& r);
Json to_json(const Partition& p);
Json to_json(const AttractorReport& r);
Json to_json(const Classification& c);
Json to_json(const CriticalOrder& o);
Json to_json(const ManeCertificate& c);
Json to_json(const GrowthRecord& g);

// Doubles as %.17g, non-finite as null, two-space indent, trailing newline.
std::string dump(const Json& j);

// %.17g, or "nan"/"inf"/"-inf".
std::string format_double(double x);

}  // namespace pwdyn

#pragma once

// Self-contained SVG documents (no external references).

#include <string>
#include <utility>
#include <vector>

#include "pwdyn/induction.hpp"

namespace pwdyn {

// One horizontal strip per labelled cover, drawn over the ambient interval.
std::string svg_cover_strips(const Interval& ambient, const std::vector<std::pair<std::string, IntervalCover>>& covers);

// Graph of the induced map over its source interval, one polyline per branch
// (the largest `max_branches` branches by length).
std::string svg_return_map(const InducedMap& ind, std::size_t max_branches = 2000);

// Graph of f, the diagonal and n cobweb steps from x.
std::string svg_cobweb(const PiecewiseMap& m, double x, std::size_t n);

std::string xml_escape(const std::string& s);

}  // namespace pwdyn

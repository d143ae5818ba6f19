#include "pwdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace pwdyn {

namespace {

constexpr double kSize = 600.0;
constexpr double kMargin = 40.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Square plot of [a.lo, a.hi]^2 with y pointing up.
struct Frame {
  Interval a;
  double sx(double x) const { return kMargin + (x - a.lo) / a.length() * kSize; }
  double sy(double y) const { return kMargin + kSize - (y - a.lo) / a.length() * kSize; }
};

std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) +
         "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n" +
         "<rect x=\"0\" y=\"0\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\" fill=\"white\"/>\n";
}

std::string axes(const Frame& f) {
  std::string s;
  s += "<rect x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kMargin) + "\" width=\"" + fmt(kSize) + "\" height=\"" +
       fmt(kSize) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + fmt(f.sx(f.a.lo)) + "\" y1=\"" + fmt(f.sy(f.a.lo)) + "\" x2=\"" + fmt(f.sx(f.a.hi)) +
       "\" y2=\"" + fmt(f.sy(f.a.hi)) + "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", f.a.lo);
  s += "<text x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kMargin + kSize + 16) + "\" font-size=\"12\">" + buf + "</text>\n";
  std::snprintf(buf, sizeof buf, "%g", f.a.hi);
  s += "<text x=\"" + fmt(kMargin + kSize - 20) + "\" y=\"" + fmt(kMargin + kSize + 16) + "\" font-size=\"12\">" + buf +
       "</text>\n";
  return s;
}

// Graph of one branch as a polyline; points are clamped to the frame.
template <class F>
std::string branch_polyline(const Frame& fr, const Interval& d, F&& f, int samples, const char* colour) {
  std::string pts;
  for (int k = 0; k <= samples; ++k) {
    // Stay strictly inside so endpoint singularities are avoided.
    const double t = (k + 0.5) / (samples + 1.0);
    const double x = d.lo + d.length() * t;
    const double y = f(x);
    if (!std::isfinite(y)) continue;
    const double yc = std::clamp(y, fr.a.lo, fr.a.hi);
    pts += fmt(fr.sx(x)) + "," + fmt(fr.sy(yc)) + " ";
  }
  if (pts.empty()) return {};
  return "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.2\"/>\n";
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_cover_strips(const Interval& ambient, const std::vector<std::pair<std::string, IntervalCover>>& covers) {
  const double strip = 24.0, gap = 26.0, label = 160.0;
  const double w = label + kSize + 2 * kMargin;
  const double h = 2 * kMargin + std::max<double>(1.0, static_cast<double>(covers.size())) * (strip + gap);
  std::string s = header(w, h);
  auto sx = [&](double x) { return label + kMargin + (x - ambient.lo) / ambient.length() * kSize; };
  for (std::size_t i = 0; i < covers.size(); ++i) {
    const double y = kMargin + static_cast<double>(i) * (strip + gap);
    s += "<text x=\"8\" y=\"" + fmt(y + strip * 0.7) + "\" font-size=\"12\">" + xml_escape(covers[i].first) +
         "</text>\n";
    s += "<rect x=\"" + fmt(sx(ambient.lo)) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(kSize) + "\" height=\"" +
         fmt(strip) + "\" fill=\"#f2f2f2\" stroke=\"#999999\"/>\n";
    for (const Interval& c : covers[i].second.cells) {
      // Cells narrower than a pixel still show up.
      const double x0 = sx(c.lo), wd = std::max(0.5, sx(c.hi) - x0);
      s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(wd) + "\" height=\"" + fmt(strip) +
           "\" fill=\"#1f4e9c\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

std::string svg_return_map(const InducedMap& ind, std::size_t max_branches) {
  Interval a{std::min(ind.source.lo, ind.base.lo), std::max(ind.source.hi, ind.base.hi)};
  Frame fr{a};
  std::string s = header(kSize + 2 * kMargin, kSize + 2 * kMargin) + axes(fr);
  // Base interval J marked on the vertical axis.
  s += "<rect x=\"" + fmt(kMargin - 6) + "\" y=\"" + fmt(fr.sy(ind.base.hi)) + "\" width=\"4\" height=\"" +
       fmt(fr.sy(ind.base.lo) - fr.sy(ind.base.hi)) + "\" fill=\"#c0392b\"/>\n";
  std::vector<std::size_t> order(ind.branches.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return ind.branches[i].domain.length() > ind.branches[j].domain.length();
  });
  if (order.size() > max_branches) order.resize(max_branches);
  std::sort(order.begin(), order.end());
  for (std::size_t b : order) {
    const Interval& d = ind.branches[b].domain;
    const int samples = std::clamp(static_cast<int>(d.length() / a.length() * 400.0), 2, 64);
    s += branch_polyline(fr, d, [&](double x) { return ind.apply(b, x); }, samples, "#1f4e9c");
  }
  s += "</svg>\n";
  return s;
}

std::string svg_cobweb(const PiecewiseMap& m, double x, std::size_t n) {
  Frame fr{m.ambient()};
  std::string s = header(kSize + 2 * kMargin, kSize + 2 * kMargin) + axes(fr);
  for (std::size_t b = 0; b < m.branches().size(); ++b) {
    const Interval& d = m.branches()[b].domain;
    s += branch_polyline(fr, d, [&](double t) { return m.eval_branch(b, t); }, 400, "#1f4e9c");
  }
  std::string pts = fmt(fr.sx(x)) + "," + fmt(fr.sy(m.ambient().lo)) + " ";
  for (std::size_t i = 0; i < n; ++i) {
    const double y = m.step(x);
    if (std::isnan(y)) break;
    pts += fmt(fr.sx(x)) + "," + fmt(fr.sy(y)) + " " + fmt(fr.sx(y)) + "," + fmt(fr.sy(y)) + " ";
    x = y;
  }
  s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"0.8\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace pwdyn

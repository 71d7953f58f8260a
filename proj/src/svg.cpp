#include "betasplit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "betasplit/stats.hpp"

namespace betasplit {

namespace {

constexpr double kCanvasW = 600.0;
constexpr double kCanvasH = 400.0;
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void add_line(std::string& svg, double x1, double y1, double x2, double y2,
              const char* stroke, double width) {
  svg += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
         "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt(width) +
         "\"/>\n";
}

void add_text(std::string& svg, double x, double y, const std::string& body, int size,
              const char* anchor) {
  svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" + std::to_string(size) +
         "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"#222\">" +
         escape_xml(body) + "</text>\n";
}

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(kCanvasW) + " " +
         fmt(kCanvasH) + "\">\n<rect width=\"" + fmt(kCanvasW) + "\" height=\"" + fmt(kCanvasH) +
         "\" fill=\"white\"/>\n";
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * (static_cast<double>(s.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return s[lo] * (1.0 - f) + s[hi] * f;
}

}  // namespace

std::string histogram_svg(const std::vector<double>& samples, const std::string& title,
                          bool overlay_standard_normal) {
  if (samples.empty()) throw std::domain_error("histogram_svg: empty sample");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double n = static_cast<double>(sorted.size());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double fd_width = 2.0 * iqr / std::cbrt(n);
  int bins;
  if (hi <= lo) {
    bins = 1;
  } else if (fd_width <= 0.0) {
    bins = 50;
  } else {
    bins = std::clamp(static_cast<int>(std::ceil((hi - lo) / fd_width)), 1, 200);
  }
  const double span = (hi > lo) ? (hi - lo) : 1.0;
  const double binw = span / bins;
  std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
  for (double x : sorted) {
    int b = static_cast<int>((x - lo) / binw);
    b = std::clamp(b, 0, bins - 1);
    density[b] += 1.0;
  }
  for (double& d : density) d /= n * binw;

  double ymax = 0.0;
  for (double d : density) ymax = std::max(ymax, d);
  if (overlay_standard_normal) ymax = std::max(ymax, 1.0 / std::sqrt(2.0 * kPi));
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.08;

  const double px0 = 60.0, px1 = 585.0, py0 = 360.0, py1 = 45.0;
  const auto sx = [&](double x) { return px0 + (x - lo) / span * (px1 - px0); };
  const auto sy = [&](double d) { return py0 - d / ymax * (py0 - py1); };

  std::string svg = svg_open();
  add_text(svg, kCanvasW / 2, 24, title, 15, "middle");
  for (int b = 0; b < bins; ++b) {
    const double x = sx(lo + b * binw);
    const double w = (px1 - px0) / bins;
    const double y = sy(density[b]);
    svg += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
           fmt(py0 - y) + "\" fill=\"#9ecae1\" stroke=\"#4477aa\" stroke-width=\"0.5\"/>\n";
  }
  if (overlay_standard_normal) {
    std::string pts;
    const int kPts = 240;
    for (int k = 0; k <= kPts; ++k) {
      const double x = lo + span * k / kPts;
      const double d = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
      pts += fmt(sx(x)) + "," + fmt(sy(d)) + " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#cc3311\" stroke-width=\"1.8\"/>\n";
  }
  add_line(svg, px0, py0, px1, py0, "#222", 1.0);
  add_line(svg, px0, py0, px0, py1, "#222", 1.0);
  for (int k = 0; k <= 4; ++k) {
    const double x = lo + span * k / 4;
    add_line(svg, sx(x), py0, sx(x), py0 + 5, "#222", 1.0);
    add_text(svg, sx(x), py0 + 20, fmt(x), 11, "middle");
  }
  for (int k = 1; k <= 4; ++k) {
    const double d = ymax * k / 4;
    add_line(svg, px0 - 5, sy(d), px0, sy(d), "#222", 1.0);
    add_text(svg, px0 - 8, sy(d) + 4, fmt(d), 11, "end");
  }
  svg += "</svg>\n";
  return svg;
}

std::string cladogram_svg(const CladeTree& tree, const std::string& title) {
  const int n = tree.n_leaves();
  const int m = tree.n_nodes();
  const std::vector<int> dh = draw_heights(tree);
  const int root_dh = dh[0];

  // Display traversal: put the larger sub-clade on the right (equal sizes keep
  // the stored order), assigning leaf slots left to right.
  std::vector<double> x(static_cast<std::size_t>(m), 0.0);
  {
    std::vector<int> stack = {0};
    int next_slot = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (tree.is_leaf(v)) {
        x[v] = next_slot + 0.5;
        ++next_slot;
        continue;
      }
      const int lc = tree.left_child(v);
      const int rc = tree.right_child(v);
      const bool swap = tree.size[lc] > tree.size[rc];  // larger stored-left clade moves right
      const int first = swap ? rc : lc;
      const int second = swap ? lc : rc;
      stack.push_back(second);  // popped after `first`
      stack.push_back(first);
    }
  }
  // Internal x = midpoint of the children's lines (children follow their
  // parent in the arena, so a reverse sweep resolves them first).
  for (int v = m - 1; v >= 0; --v) {
    if (!tree.is_leaf(v)) x[v] = 0.5 * (x[tree.left_child(v)] + x[tree.right_child(v)]);
  }

  const double px0 = 30.0, px1 = 570.0, py0 = 365.0, py1 = 55.0;
  const auto sx = [&](double xx) { return px0 + xx / std::max(n, 1) * (px1 - px0); };
  const auto sy = [&](int level) {
    return py0 - static_cast<double>(level) / std::max(root_dh, 1) * (py0 - py1);
  };

  std::string svg = svg_open();
  add_text(svg, kCanvasW / 2, 24, title, 15, "middle");
  if (n == 1) {
    svg += "<circle cx=\"" + fmt(sx(0.5)) + "\" cy=\"" + fmt(py0) + "\" r=\"3\" fill=\"#222\"/>\n";
    svg += "</svg>\n";
    return svg;
  }
  for (int v = 0; v < m; ++v) {
    if (tree.is_leaf(v)) continue;
    const int lc = tree.left_child(v);
    const int rc = tree.right_child(v);
    const double y = sy(dh[v]);
    add_line(svg, sx(std::min(x[lc], x[rc])), y, sx(std::max(x[lc], x[rc])), y, "#225588", 1.6);
    add_line(svg, sx(x[lc]), sy(dh[lc]), sx(x[lc]), y, "#225588", 1.6);
    add_line(svg, sx(x[rc]), sy(dh[rc]), sx(x[rc]), y, "#225588", 1.6);
  }
  for (int v = 0; v < m; ++v) {
    if (tree.is_leaf(v)) {
      svg += "<circle cx=\"" + fmt(sx(x[v])) + "\" cy=\"" + fmt(py0) + "\" r=\"2\" fill=\"#222\"/>\n";
    }
  }
  add_text(svg, px0, 390, "levels 0.." + std::to_string(root_dh), 11, "start");
  svg += "</svg>\n";
  return svg;
}

}  // namespace betasplit

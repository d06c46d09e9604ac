#include "gbpinn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gbpinn {

namespace {

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&')
      o += "&amp;";
    else if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else
      o += c;
  }
  return o;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

// viridis anchors, dark blue to yellow; linear interpolation between them.
constexpr int kVirN = 9;
constexpr unsigned char kViridis[kVirN][3] = {
    {68, 1, 84},    {72, 40, 120},  {62, 74, 137},  {49, 104, 142},
    {38, 130, 142}, {31, 158, 137}, {53, 183, 121}, {109, 205, 89},
    {253, 231, 37}};

std::string viridis(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double p = t * (kVirN - 1);
  const int i = std::min(kVirN - 2, static_cast<int>(p));
  const double f = p - i;
  char b[8];
  std::snprintf(b, sizeof b, "#%02x%02x%02x",
                int(kViridis[i][0] + f * (kViridis[i + 1][0] - kViridis[i][0])),
                int(kViridis[i][1] + f * (kViridis[i + 1][1] - kViridis[i][1])),
                int(kViridis[i][2] + f * (kViridis[i + 1][2] - kViridis[i][2])));
  return b;
}

struct Range {
  double lo, hi;
  double clamp01(double v) const {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  }
};

Range span_of(std::span<const double> v) {
  Range r{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (double x : v) {
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  if (!(r.lo <= r.hi)) r = {0.0, 1.0};
  if (r.lo == r.hi) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           std::span<const double> xs,
                           const std::vector<NamedSeries>& series,
                           bool log_y) {
  if (xs.empty() || series.empty())
    throw std::invalid_argument("svg_line_chart: empty data");
  for (const auto& s : series)
    if (s.second.size() != xs.size())
      throw std::invalid_argument("svg_line_chart: series length mismatch");

  if (log_y)
    for (const auto& s : series)
      for (double v : s.second)
        if (!(v > 0.0)) {
          log_y = false;
          break;
        }

  const double W = 680, H = 420, ml = 70, mr = 18, mt = 34, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;

  Range xr = span_of(xs);
  Range yr{std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  for (const auto& s : series) {
    Range r = span_of(s.second);
    yr.lo = std::min(yr.lo, log_y ? std::log10(r.lo) : r.lo);
    yr.hi = std::max(yr.hi, log_y ? std::log10(r.hi) : r.hi);
  }
  if (yr.lo == yr.hi) {
    yr.lo -= 0.5;
    yr.hi += 0.5;
  }

  auto X = [&](double x) { return ml + pw * xr.clamp01(x); };
  auto Y = [&](double y) {
    const double t = yr.clamp01(log_y ? std::log10(y) : y);
    return mt + ph * (1.0 - t);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
         "\" height=\"" + num(H) + "\" viewBox=\"0 0 " + num(W) + " " +
         num(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(W / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" +
         esc(title) + "</text>\n";

  // Axes and ticks.
  svg += "<g stroke=\"#333\" stroke-width=\"1\">";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
         num(ml + pw) + "\" y2=\"" + num(mt + ph) + "\"/>";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" +
         num(ml) + "\" y2=\"" + num(mt + ph) + "\"/></g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    svg += "<text x=\"" + num(X(fx)) + "\" y=\"" + num(mt + ph + 16) +
           "\" text-anchor=\"middle\">" + num(fx) + "</text>\n";
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double vy = log_y ? std::pow(10.0, fy) : fy;
    svg += "<text x=\"" + num(ml - 6) + "\" y=\"" +
           num(mt + ph * (1.0 - i / 4.0) + 3) +
           "\" text-anchor=\"end\">" + num(vy) + "</text>\n";
  }
  svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(H - 10) +
         "\" text-anchor=\"middle\">" + esc(x_label) +
         (log_y ? " (log scale)" : "") + "</text>\n</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
      pts += num(X(xs[i])) + "," + num(Y(series[s].second[i])) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" +
           std::string(kPalette[s % 8]) + "\" stroke-width=\"1.4\" points=\"" +
           pts + "\"/>\n";
    const double ly = mt + 14 + 14.0 * s;
    svg += "<line x1=\"" + num(ml + pw - 130) + "\" y1=\"" + num(ly - 4) +
           "\" x2=\"" + num(ml + pw - 110) + "\" y2=\"" + num(ly - 4) +
           "\" stroke=\"" + kPalette[s % 8] + "\" stroke-width=\"2\"/>";
    svg += "<text x=\"" + num(ml + pw - 105) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           esc(series[s].first) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string svg_heatmaps(const std::string& title,
                         std::span<const std::size_t> shape,
                         std::array<double, 2> x_range,
                         std::array<double, 2> y_range,
                         const std::vector<NamedSeries>& panels,
                         std::size_t max_axis) {
  if (shape.size() != 2) throw std::invalid_argument("heatmaps need 2D data");
  const std::size_t n0 = shape[0], n1 = shape[1];
  for (const auto& p : panels)
    if (p.second.size() != n0 * n1)
      throw std::invalid_argument("heatmap panel size mismatch");

  const std::size_t s0 = (n0 + max_axis - 1) / max_axis;
  const std::size_t s1 = (n1 + max_axis - 1) / max_axis;
  const std::size_t m0 = (n0 + s0 - 1) / s0, m1 = (n1 + s1 - 1) / s1;

  const double panel = 240.0, gap = 36.0, mt = 46.0, mb = 34.0, ml = 46.0;
  const double W = ml + panels.size() * (panel + gap);
  const double H = mt + panel + mb;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
         "\" height=\"" + num(H) + "\" viewBox=\"0 0 " + num(W) + " " +
         num(H) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(W / 2) + "\" y=\"18\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" +
         esc(title) + "</text>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const double ox = ml + pi * (panel + gap);
    const auto& vals = panels[pi].second;
    Range r = span_of(vals);
    const double cw = panel / double(m0), ch = panel / double(m1);
    svg += "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t i0 = 0; i0 < m0; ++i0) {
      for (std::size_t i1 = 0; i1 < m1; ++i1) {
        const double v = vals[std::min(i0 * s0, n0 - 1) * n1 +
                              std::min(i1 * s1, n1 - 1)];
        // axis 0 is horizontal, axis 1 vertical with origin bottom-left
        svg += "<rect x=\"" + num(ox + cw * i0) + "\" y=\"" +
               num(mt + panel - ch * (i1 + 1)) + "\" width=\"" +
               num(cw + 0.5) + "\" height=\"" + num(ch + 0.5) + "\" fill=\"" +
               viridis(r.clamp01(v)) + "\"/>";
      }
      svg += "\n";
    }
    svg += "</g>\n";
    svg += "<text x=\"" + num(ox + panel / 2) + "\" y=\"" + num(mt - 8) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           esc(panels[pi].first) + " [" + num(r.lo) + ", " + num(r.hi) +
           "]</text>\n";
    svg += "<text x=\"" + num(ox) + "\" y=\"" + num(mt + panel + 14) +
           "\" font-family=\"sans-serif\" font-size=\"9\">" +
           num(x_range[0]) + "</text>";
    svg += "<text x=\"" + num(ox + panel) + "\" y=\"" + num(mt + panel + 14) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">" +
           num(x_range[1]) + "</text>\n";
    if (pi == 0) {
      svg += "<text x=\"" + num(ox - 6) + "\" y=\"" + num(mt + panel) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"9\">" +
             num(y_range[0]) + "</text>";
      svg += "<text x=\"" + num(ox - 6) + "\" y=\"" + num(mt + 8) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"9\">" +
             num(y_range[1]) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gbpinn

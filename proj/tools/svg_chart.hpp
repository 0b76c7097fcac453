#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace chart {

struct Series {
  std::string label;
  const std::vector<double>* x = nullptr;
  const std::vector<double>* y = nullptr;
};

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};

namespace detail {

inline std::string num(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double span() const { return hi - lo; }
};

inline Range fit(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = (std::abs(lo) > 1e-12) ? std::abs(lo) * 0.1 : 1.0;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

}  // namespace detail

/// Multi-series line chart as a standalone SVG document.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<Series>& series) {
  using detail::num;

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool first = true;
  for (const Series& s : series) {
    for (std::size_t k = 0; k < s.x->size(); ++k) {
      const double px = (*s.x)[k], py = (*s.y)[k];
      if (first) {
        x_lo = x_hi = px;
        y_lo = y_hi = py;
        first = false;
      }
      x_lo = std::min(x_lo, px);
      x_hi = std::max(x_hi, px);
      y_lo = std::min(y_lo, py);
      y_hi = std::max(y_hi, py);
    }
  }
  const detail::Range xr = detail::fit(x_lo, x_hi);
  const detail::Range yr = detail::fit(y_lo, y_hi);

  const double w = 880, h = 500;
  const double px0 = 72, px1 = 850, py0 = 46, py1 = 446;
  auto map_x = [&](double v) { return px0 + (v - xr.lo) / xr.span() * (px1 - px0); };
  auto map_y = [&](double v) { return py1 - (v - yr.lo) / yr.span() * (py1 - py0); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w, "%.0f") +
         "\" height=\"" + num(h, "%.0f") + "\" viewBox=\"0 0 " + num(w, "%.0f") + " " +
         num(h, "%.0f") + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num((px0 + px1) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";

  const int ticks = 6;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xr.lo + xr.span() * i / ticks;
    const double gx = map_x(fx);
    svg += "<line x1=\"" + num(gx) + "\" y1=\"" + num(py0) + "\" x2=\"" + num(gx) + "\" y2=\"" +
           num(py1) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(gx) + "\" y=\"" + num(py1 + 18) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + num(fx, "%.3g") + "</text>\n";

    const double fy = yr.lo + yr.span() * i / ticks;
    const double gy = map_y(fy);
    svg += "<line x1=\"" + num(px0) + "\" y1=\"" + num(gy) + "\" x2=\"" + num(px1) + "\" y2=\"" +
           num(gy) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(px0 - 6) + "\" y=\"" + num(gy + 4) + "\" text-anchor=\"end\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + num(fy, "%.3g") + "</text>\n";
  }
  svg += "<rect x=\"" + num(px0) + "\" y=\"" + num(py0) + "\" width=\"" + num(px1 - px0) +
         "\" height=\"" + num(py1 - py0) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
  svg += "<text x=\"" + num((px0 + px1) / 2) + "\" y=\"" + num(h - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + x_label +
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + num((py0 + py1) / 2) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
         num((py0 + py1) / 2) + ")\">" + y_label + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % 6];
    std::string points;
    for (std::size_t k = 0; k < s.x->size(); ++k) {
      points += num(map_x((*s.x)[k]));
      points += ',';
      points += num(map_y((*s.y)[k]));
      points += ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";

    const double ly = py0 + 16 + 18 * static_cast<double>(si);
    svg += "<line x1=\"" + num(px1 - 150) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(px1 - 120) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(px1 - 112) + "\" y=\"" + num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace chart

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "motionopt/io.hpp"
#include "motionopt/optimal_sets.hpp"
#include "motionopt/uncertainty.hpp"

namespace motionopt {

// Static SVG rendering of fields and curves on log-log axes. Pure
// presentation: everything is derived from the same data the CSVs carry,
// written with fixed short precision.

namespace svg_detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// 256-step ramp, linear interpolation through five anchor colors
// (dark violet to pale yellow).
inline std::string ramp_color(double t) {
  static const int anchors[5][3] = {
      {0, 0, 4}, {59, 15, 112}, {140, 41, 129}, {222, 73, 104}, {252, 253, 191}};
  t = std::clamp(t, 0.0, 1.0);
  const int step = std::min(255, int(t * 256.0));
  const double pos = step / 255.0 * 4.0;
  const int seg = std::min(3, int(pos));
  const double frac = pos - seg;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                int(anchors[seg][0] + frac * (anchors[seg + 1][0] - anchors[seg][0])),
                int(anchors[seg][1] + frac * (anchors[seg + 1][1] - anchors[seg][1])),
                int(anchors[seg][2] + frac * (anchors[seg + 1][2] - anchors[seg][2])));
  return buf;
}

struct LogFrame {
  double lt_min, lt_max, ls_min, ls_max;
  double width, height, margin;
  std::string x_label = "T", y_label = "S";

  double px(double t) const {
    return margin + (std::log(t) - lt_min) / (lt_max - lt_min) * (width - 2 * margin);
  }
  double py(double s) const {
    return height - margin -
           (std::log(s) - ls_min) / (ls_max - ls_min) * (height - 2 * margin);
  }
};

inline void axes(std::string& out, const LogFrame& f) {
  out += "<rect x='" + num(f.margin) + "' y='" + num(f.margin) + "' width='" +
         num(f.width - 2 * f.margin) + "' height='" + num(f.height - 2 * f.margin) +
         "' fill='none' stroke='black' stroke-width='1'/>\n";
  // Decade ticks with labels.
  for (int e = int(std::ceil(f.lt_min / std::log(10.0)));
       e <= int(std::floor(f.lt_max / std::log(10.0))); ++e) {
    const double t = std::pow(10.0, e);
    const double x = f.px(t);
    out += "<line x1='" + num(x) + "' y1='" + num(f.height - f.margin) + "' x2='" + num(x) +
           "' y2='" + num(f.height - f.margin + 5) + "' stroke='black'/>\n";
    out += "<text x='" + num(x) + "' y='" + num(f.height - f.margin + 18) +
           "' font-size='11' text-anchor='middle'>1e" + std::to_string(e) + "</text>\n";
  }
  for (int e = int(std::ceil(f.ls_min / std::log(10.0)));
       e <= int(std::floor(f.ls_max / std::log(10.0))); ++e) {
    const double s = std::pow(10.0, e);
    const double y = f.py(s);
    out += "<line x1='" + num(f.margin - 5) + "' y1='" + num(y) + "' x2='" + num(f.margin) +
           "' y2='" + num(y) + "' stroke='black'/>\n";
    out += "<text x='" + num(f.margin - 8) + "' y='" + num(y + 4) +
           "' font-size='11' text-anchor='end'>1e" + std::to_string(e) + "</text>\n";
  }
  out += "<text x='" + num(f.width / 2) + "' y='" + num(f.height - 4) +
         "' font-size='12' text-anchor='middle'>" + f.x_label + "</text>\n";
  out += "<text x='12' y='" + num(f.height / 2) +
         "' font-size='12' text-anchor='middle' transform='rotate(-90 12 " +
         num(f.height / 2) + ")'>" + f.y_label + "</text>\n";
}

}  // namespace svg_detail

struct SvgOptions {
  double width = 640.0;
  double height = 640.0;
  double margin = 56.0;
  bool heatmap = true;
  bool log_color = false;  // color by ln(value) instead of value
  std::string x_label = "T";
  std::string y_label = "S";
};

inline std::string render_svg(const GridSpec& grid, const ScalarField* field,
                              const std::vector<Curve>& curves,
                              const SvgOptions& opt = {}) {
  grid.validate();
  svg_detail::LogFrame frame{std::log(grid.t_min), std::log(grid.t_max),
                             std::log(grid.s_min), std::log(grid.s_max),
                             opt.width,            opt.height,
                             opt.margin,           opt.x_label,
                             opt.y_label};
  std::string out;
  out += "<svg xmlns='http://www.w3.org/2000/svg' width='" + svg_detail::num(opt.width) +
         "' height='" + svg_detail::num(opt.height) + "'>\n";
  out += "<rect width='100%' height='100%' fill='white'/>\n";

  if (field && opt.heatmap) {
    field->validate();
    double vmin = field->min_value(), vmax = field->max_value();
    if (opt.log_color) {
      vmin = std::log(std::max(vmin, 1e-300));
      vmax = std::log(std::max(vmax, 1e-300));
    }
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    // Cell edges at geometric midpoints between samples, clamped at the box.
    auto edge = [](double a, double b) { return std::sqrt(a * b); };
    for (int i = 0; i < grid.n_t; ++i) {
      const double t0 = i == 0 ? grid.t_min : edge(grid.t_sample(i - 1), grid.t_sample(i));
      const double t1 = i == grid.n_t - 1 ? grid.t_max
                                          : edge(grid.t_sample(i), grid.t_sample(i + 1));
      for (int j = 0; j < grid.n_s; ++j) {
        const double s0 =
            j == 0 ? grid.s_min : edge(grid.s_sample(j - 1), grid.s_sample(j));
        const double s1 = j == grid.n_s - 1 ? grid.s_max
                                            : edge(grid.s_sample(j), grid.s_sample(j + 1));
        double v = field->at(i, j);
        if (opt.log_color) v = std::log(std::max(v, 1e-300));
        const double x = frame.px(t0), y = frame.py(s1);
        out += "<rect x='" + svg_detail::num(x) + "' y='" + svg_detail::num(y) +
               "' width='" + svg_detail::num(frame.px(t1) - x) + "' height='" +
               svg_detail::num(frame.py(s0) - y) + "' fill='" +
               svg_detail::ramp_color((v - vmin) / span) + "'/>\n";
      }
    }
  }

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  int color = 0;
  for (const auto& curve : curves) {
    if (curve.points.empty()) continue;
    std::string pts;
    for (const auto& [t, s] : curve.points)
      pts += svg_detail::num(frame.px(t)) + "," + svg_detail::num(frame.py(s)) + " ";
    out += "<polyline points='" + pts + "' fill='none' stroke='" +
           palette[color % 6] + "' stroke-width='1.5'/>\n";
    ++color;
  }

  svg_detail::axes(out, frame);
  out += "</svg>\n";
  return out;
}

inline void write_svg(const std::filesystem::path& path, const GridSpec& grid,
                      const ScalarField* field, const std::vector<Curve>& curves,
                      const SvgOptions& opt = {}) {
  auto f = open_for_write(path);
  f << render_svg(grid, field, curves, opt);
}

}  // namespace motionopt

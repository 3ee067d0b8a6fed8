/*
 * Copyright 2026 The ipweval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Minimal SVG line-plot writer: polyline series, translucent interval
// bands, vertical error bars, an optional dashed diagonal reference, axis
// ticks, legends, and a grid of panels per figure. Coordinates are emitted
// at fixed precision so output is byte-deterministic. CSVs remain the
// source of truth; these figures are for quick visual inspection.

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace ipweval {
namespace svg {

inline const char* kActualColor = "#1f77b4";
inline const char* kObservedColor = "#d62728";
inline const char* kWeightedColor = "#2ca02c";

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
  bool markers = false;
};

/// Shaded region between (x, y_lo) and (x, y_hi) samples.
struct Band {
  std::string color;
  std::vector<std::array<double, 3>> points;  // x, y_lo, y_hi
};

struct ErrorBar {
  std::string color;
  double x = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  bool diagonal = false;
  std::vector<Band> bands;
  std::vector<Series> series;
  std::vector<ErrorBar> error_bars;
  bool legend = true;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Transform {
  double px = 0.0, py = 0.0, pw = 0.0, ph = 0.0;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

  double x(double v) const {
    const double span = x_max - x_min;
    return px + (span != 0.0 ? (v - x_min) / span : 0.5) * pw;
  }
  double y(double v) const {
    const double span = y_max - y_min;
    return py + ph - (span != 0.0 ? (v - y_min) / span : 0.5) * ph;
  }
};

inline void render_panel(std::string& out, const Panel& panel, double ox, double oy,
                         double width, double height) {
  const double ml = 46.0, mr = 10.0, mt = 24.0, mb = 36.0;
  Transform t;
  t.px = ox + ml;
  t.py = oy + mt;
  t.pw = width - ml - mr;
  t.ph = height - mt - mb;
  t.x_min = panel.x_min;
  t.x_max = panel.x_max;
  t.y_min = panel.y_min;
  t.y_max = panel.y_max;

  out += "<rect x=\"" + num(t.px) + "\" y=\"" + num(t.py) + "\" width=\"" + num(t.pw) +
         "\" height=\"" + num(t.ph) +
         "\" fill=\"white\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  if (!panel.title.empty()) {
    out += "<text x=\"" + num(t.px + t.pw / 2.0) + "\" y=\"" + num(oy + 15.0) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
           escape(panel.title) + "</text>\n";
  }

  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double fx = panel.x_min + (panel.x_max - panel.x_min) * i / n_ticks;
    const double gx = t.x(fx);
    out += "<line x1=\"" + num(gx) + "\" y1=\"" + num(t.py + t.ph) + "\" x2=\"" + num(gx) +
           "\" y2=\"" + num(t.py + t.ph + 4.0) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(gx) + "\" y=\"" + num(t.py + t.ph + 16.0) +
           "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">" + num(fx) +
           "</text>\n";
    const double fy = panel.y_min + (panel.y_max - panel.y_min) * i / n_ticks;
    const double gy = t.y(fy);
    out += "<line x1=\"" + num(t.px - 4.0) + "\" y1=\"" + num(gy) + "\" x2=\"" + num(t.px) +
           "\" y2=\"" + num(gy) + "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(t.px - 6.0) + "\" y=\"" + num(gy + 3.0) +
           "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">" + num(fy) +
           "</text>\n";
  }
  if (!panel.x_label.empty()) {
    out += "<text x=\"" + num(t.px + t.pw / 2.0) + "\" y=\"" + num(t.py + t.ph + 30.0) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
           escape(panel.x_label) + "</text>\n";
  }
  if (!panel.y_label.empty()) {
    const double lx = ox + 12.0;
    const double ly = t.py + t.ph / 2.0;
    out += "<text x=\"" + num(lx) + "\" y=\"" + num(ly) +
           "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\" transform=\"rotate(-90 " +
           num(lx) + " " + num(ly) + ")\">" + escape(panel.y_label) + "</text>\n";
  }

  for (const auto& band : panel.bands) {
    if (band.points.size() < 2) continue;
    std::string pts;
    for (const auto& p : band.points)
      pts += num(t.x(p[0])) + "," + num(t.y(p[2])) + " ";
    for (auto it = band.points.rbegin(); it != band.points.rend(); ++it)
      pts += num(t.x((*it)[0])) + "," + num(t.y((*it)[1])) + " ";
    pts.pop_back();
    out += "<polygon points=\"" + pts + "\" fill=\"" + band.color +
           "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }

  if (panel.diagonal) {
    out += "<line x1=\"" + num(t.x(panel.x_min)) + "\" y1=\"" + num(t.y(panel.x_min)) +
           "\" x2=\"" + num(t.x(panel.x_max)) + "\" y2=\"" + num(t.y(panel.x_max)) +
           "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
  }

  for (const auto& bar : panel.error_bars) {
    const double gx = t.x(bar.x);
    out += "<line x1=\"" + num(gx) + "\" y1=\"" + num(t.y(bar.y_lo)) + "\" x2=\"" + num(gx) +
           "\" y2=\"" + num(t.y(bar.y_hi)) + "\" stroke=\"" + bar.color +
           "\" stroke-width=\"1\"/>\n";
    for (double y : {bar.y_lo, bar.y_hi}) {
      out += "<line x1=\"" + num(gx - 3.0) + "\" y1=\"" + num(t.y(y)) + "\" x2=\"" +
             num(gx + 3.0) + "\" y2=\"" + num(t.y(y)) + "\" stroke=\"" + bar.color +
             "\" stroke-width=\"1\"/>\n";
    }
  }

  for (const auto& series : panel.series) {
    if (series.points.size() >= 2) {
      std::string pts;
      for (const auto& [x, y] : series.points) pts += num(t.x(x)) + "," + num(t.y(y)) + " ";
      pts.pop_back();
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + series.color +
             "\" stroke-width=\"1.5\"";
      if (series.dashed) out += " stroke-dasharray=\"6,4\"";
      out += "/>\n";
    }
    if (series.markers || series.points.size() == 1) {
      for (const auto& [x, y] : series.points) {
        out += "<circle cx=\"" + num(t.x(x)) + "\" cy=\"" + num(t.y(y)) +
               "\" r=\"2.5\" fill=\"" + series.color + "\"/>\n";
      }
    }
  }

  if (panel.legend && !panel.series.empty()) {
    double ly = t.py + 8.0;
    const double lx = t.px + t.pw - 104.0;
    for (const auto& series : panel.series) {
      if (series.label.empty()) continue;
      out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 18.0) +
             "\" y2=\"" + num(ly) + "\" stroke=\"" + series.color + "\" stroke-width=\"1.5\"";
      if (series.dashed) out += " stroke-dasharray=\"6,4\"";
      out += "/>\n";
      out += "<text x=\"" + num(lx + 23.0) + "\" y=\"" + num(ly + 3.5) +
             "\" font-size=\"10\" font-family=\"sans-serif\">" + escape(series.label) +
             "</text>\n";
      ly += 13.0;
    }
  }
}

}  // namespace detail

/// Render panels in a grid with `cols` columns.
inline std::string render(const std::vector<Panel>& panels, int cols,
                          double panel_width = 320.0, double panel_height = 280.0) {
  if (cols < 1) cols = 1;
  const int n = static_cast<int>(panels.size());
  const int rows = (n + cols - 1) / cols;
  const double width = panel_width * std::min(cols, std::max(n, 1));
  const double height = panel_height * std::max(rows, 1);
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) +
         "\" height=\"" + detail::num(height) + "\" viewBox=\"0 0 " + detail::num(width) +
         " " + detail::num(height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + detail::num(width) + "\" height=\"" +
         detail::num(height) + "\" fill=\"white\"/>\n";
  for (int i = 0; i < n; ++i) {
    const double ox = panel_width * (i % cols);
    const double oy = panel_height * (i / cols);
    detail::render_panel(out, panels[static_cast<std::size_t>(i)], ox, oy, panel_width,
                         panel_height);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace svg
}  // namespace ipweval

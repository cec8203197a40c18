#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "cte/numeric.hpp"

namespace cte {

// Minimal native SVG line charts and heatmaps; byte-identical output for
// identical inputs (no timestamps, fixed number formatting).
namespace svg {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

struct Series {
  std::string name;
  std::vector<double> xs, ys;
};

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<Series>& series) {
  const double W = 640, H = 420, L = 70, R = 150, T = 46, B = 52;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double x : s.xs) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    for (double y : s.ys) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (!(ymin < ymax)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
         "\" height=\"" + num(H) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         title + "</text>\n";
  // axes
  out += "<line x1=\"" + num(L) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(W - R) +
         "\" y2=\"" + num(H - B) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(L) + "\" y1=\"" + num(T) + "\" x2=\"" + num(L) +
         "\" y2=\"" + num(H - B) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    double xv = xmin + t * (xmax - xmin) / 4;
    double yv = ymin + t * (ymax - ymin) / 4;
    out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(H - B + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(xv) + "</text>\n";
    out += "<text x=\"" + num(L - 8) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + num(yv) + "</text>\n";
    out += "<line x1=\"" + num(L) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(W - R) +
           "\" y2=\"" + num(py(yv)) + "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out += "<text x=\"" + num((W - R + L) / 2) + "\" y=\"" + num(H - 12) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + x_label + "</text>\n";
  out += "<text x=\"16\" y=\"" + num((H - B + T) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num((H - B + T) / 2) + ")\">" + y_label + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    std::string pts;
    for (std::size_t i = 0; i < sr.xs.size(); ++i) {
      pts += num(px(sr.xs[i])) + "," + num(py(sr.ys[i])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(palette(s)) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    for (std::size_t i = 0; i < sr.xs.size(); ++i) {
      out += "<circle cx=\"" + num(px(sr.xs[i])) + "\" cy=\"" + num(py(sr.ys[i])) +
             "\" r=\"2.5\" fill=\"" + std::string(palette(s)) + "\"/>\n";
    }
    double ly = T + 16 + 16 * static_cast<double>(s);
    out += "<line x1=\"" + num(W - R + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(W - R + 30) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" +
           std::string(palette(s)) + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(W - R + 36) + "\" y=\"" + num(ly) +
           "\" font-size=\"11\">" + sr.name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

// blue -> white -> red over [lo, hi]
inline std::string heat_color(double v, double lo, double hi) {
  double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  t = clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    double u = t / 0.5;
    r = static_cast<int>(49 + u * (255 - 49));
    g = static_cast<int>(130 + u * (255 - 130));
    b = static_cast<int>(189 + u * (255 - 189));
  } else {
    double u = (t - 0.5) / 0.5;
    r = static_cast<int>(255 - u * (255 - 202));
    g = static_cast<int>(255 - u * (255 - 0));
    b = static_cast<int>(255 - u * (255 - 32));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline std::string heatmap(const std::string& title,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<double>>& values,
                           const std::string& row_axis, const std::string& col_axis) {
  const double cell = 64, L = 110, T = 70;
  const auto rows = static_cast<double>(row_labels.size());
  const auto cols = static_cast<double>(col_labels.size());
  const double W = L + cols * cell + 60, H = T + rows * cell + 60;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : values) {
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
         "\" height=\"" + num(H) + "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         title + "</text>\n";
  out += "<text x=\"" + num(L + cols * cell / 2) + "\" y=\"" + num(T - 26) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + col_axis + "</text>\n";
  out += "<text x=\"24\" y=\"" + num(T + rows * cell / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 24 " +
         num(T + rows * cell / 2) + ")\">" + row_axis + "</text>\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    out += "<text x=\"" + num(L - 8) + "\" y=\"" + num(T + (r + 0.5) * cell + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + row_labels[r] + "</text>\n";
    for (std::size_t c = 0; c < col_labels.size(); ++c) {
      double v = values[r][c];
      out += "<rect x=\"" + num(L + c * cell) + "\" y=\"" + num(T + r * cell) +
             "\" width=\"" + num(cell) + "\" height=\"" + num(cell) + "\" fill=\"" +
             heat_color(v, lo, hi) + "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
      out += "<text x=\"" + num(L + (c + 0.5) * cell) + "\" y=\"" +
             num(T + (r + 0.5) * cell + 4) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + num(v) + "</text>\n";
    }
  }
  for (std::size_t c = 0; c < col_labels.size(); ++c) {
    out += "<text x=\"" + num(L + (c + 0.5) * cell) + "\" y=\"" + num(T - 8) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + col_labels[c] + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace svg
}  // namespace cte

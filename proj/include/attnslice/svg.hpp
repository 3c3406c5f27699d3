// Copyright 2026 The attnslice Authors
// SPDX-License-Identifier: Apache-2.0
//
// Static SVG figures: the per-answer attention plot (curve in red, sampled
// timesteps as a grey histogram, slices as blue boxes) and plain bar
// histograms for slice-duration and relative-start distributions. Pure
// string builders, no rendering dependency.

#ifndef ATTNSLICE_SVG_HPP
#define ATTNSLICE_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "attnslice/common.hpp"
#include "attnslice/peaks.hpp"

namespace attnslice {

/// Fixed-width bins starting at bin_start; counts[i] covers
/// [bin_start + i*w, bin_start + (i+1)*w), with the global maximum folded
/// into the last bin.
struct Histogram {
  double bin_start = 0.0;
  double bin_width = 1.0;
  std::vector<double> counts;
};

inline Histogram make_histogram(const std::vector<double>& values, double bin_width,
                                double bin_start = 0.0) {
  if (bin_width <= 0) throw ConfigError("histogram bin_width must be > 0");
  Histogram h;
  h.bin_start = bin_start;
  h.bin_width = bin_width;
  if (values.empty()) return h;
  double vmax = values[0];
  for (double v : values) {
    if (v < bin_start) throw DataError("histogram value below bin_start");
    vmax = std::max(vmax, v);
  }
  const std::size_t n_bins =
      static_cast<std::size_t>(std::floor((vmax - bin_start) / bin_width)) + 1;
  h.counts.assign(n_bins, 0.0);
  for (double v : values) {
    std::size_t i = static_cast<std::size_t>(std::floor((v - bin_start) / bin_width));
    if (i >= n_bins) i = n_bins - 1;  // vmax can land one past on exact division
    h.counts[i] += 1.0;
  }
  return h;
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

/// Maps data coordinates into the plot box; y grows upward in data space.
struct PlotFrame {
  double width = 900, height = 320;
  double left = 55, right = 15, top = 30, bottom = 40;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const {
    return left + (x - x0) / (x1 - x0) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);
  }

  void open(std::string& s, const std::string& title) const {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) +
         "\" height=\"" + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " +
         svg_num(height) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + svg_num(width / 2) + "\" y=\"18\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"13\">" + xml_escape(title) + "</text>\n";
  }

  void axes(std::string& s, const std::string& x_label, const std::string& y_label) const {
    const std::string ax = "stroke=\"#444\" stroke-width=\"1\"";
    s += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(height - bottom) + "\" x2=\"" +
         svg_num(width - right) + "\" y2=\"" + svg_num(height - bottom) + "\" " + ax + "/>\n";
    s += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top) + "\" x2=\"" + svg_num(left) +
         "\" y2=\"" + svg_num(height - bottom) + "\" " + ax + "/>\n";
    s += "<text x=\"" + svg_num((left + width - right) / 2) + "\" y=\"" + svg_num(height - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
         xml_escape(x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + svg_num((top + height - bottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 14 " +
         svg_num((top + height - bottom) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
    // end-of-range ticks keep the scales readable without a full grid
    s += "<text x=\"" + svg_num(left) + "\" y=\"" + svg_num(height - bottom + 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + svg_num(x0) +
         "</text>\n";
    s += "<text x=\"" + svg_num(width - right) + "\" y=\"" + svg_num(height - bottom + 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + svg_num(x1) +
         "</text>\n";
    s += "<text x=\"" + svg_num(left - 6) + "\" y=\"" + svg_num(py(y1) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + svg_num(y1) +
         "</text>\n";
  }
};

}  // namespace detail

/// Renders one answer: the attention curve in red over a grey histogram of
/// the clustering draws, with every extracted slice as a translucent blue
/// box spanning the plot height.
inline std::string render_answer_plot(const Vec& curve, const std::vector<int>& draws,
                                      const std::vector<Slice>& slices,
                                      const std::string& title) {
  check_curve(curve);
  const std::size_t T = curve.size();

  std::vector<double> hist(T, 0.0);
  for (int d : draws) {
    if (d < 0 || static_cast<std::size_t>(d) >= T) throw DataError("draw index out of range");
    hist[static_cast<std::size_t>(d)] += 1.0;
  }
  const double hist_max = std::max(1.0, *std::max_element(hist.begin(), hist.end()));
  const double curve_max = *std::max_element(curve.begin(), curve.end());

  detail::PlotFrame f;
  f.x0 = 0;
  f.x1 = static_cast<double>(T);
  f.y0 = 0;
  f.y1 = std::max(curve_max, 1e-12);

  std::string s;
  f.open(s, title);

  for (const Slice& sl : slices) {
    const double x = f.px(sl.start_idx);
    const double w = f.px(sl.end_idx + 1) - x;
    s += "<rect x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(f.py(f.y1)) +
         "\" width=\"" + detail::svg_num(w) + "\" height=\"" +
         detail::svg_num(f.py(f.y0) - f.py(f.y1)) +
         "\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"#1f77b4\"/>\n";
  }

  const double bar_w = (f.width - f.left - f.right) / static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (hist[t] <= 0) continue;
    const double hfrac = hist[t] / hist_max;
    const double hpix = hfrac * (f.height - f.top - f.bottom);
    s += "<rect x=\"" + detail::svg_num(f.px(static_cast<double>(t))) + "\" y=\"" +
         detail::svg_num(f.height - f.bottom - hpix) + "\" width=\"" + detail::svg_num(bar_w) +
         "\" height=\"" + detail::svg_num(hpix) + "\" fill=\"#bbbbbb\"/>\n";
  }

  std::string pts;
  for (std::size_t t = 0; t < T; ++t) {
    pts += detail::svg_num(f.px(static_cast<double>(t) + 0.5)) + "," +
           detail::svg_num(f.py(curve[t]));
    if (t + 1 < T) pts += " ";
  }
  s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";

  f.axes(s, "frame", "attention");
  s += "</svg>\n";
  return s;
}

/// Plain bar chart of a histogram; used for the slice-duration and
/// relative-start distributions.
inline std::string render_histogram(const Histogram& h, const std::string& title,
                                    const std::string& x_label, const std::string& y_label) {
  detail::PlotFrame f;
  f.height = 300;
  f.x0 = h.bin_start;
  f.x1 = h.bin_start + h.bin_width * static_cast<double>(std::max<std::size_t>(1, h.counts.size()));
  double cmax = 1.0;
  for (double c : h.counts) cmax = std::max(cmax, c);
  f.y0 = 0;
  f.y1 = cmax;

  std::string s;
  f.open(s, title);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] <= 0) continue;
    const double xl = f.px(h.bin_start + h.bin_width * static_cast<double>(i));
    const double xr = f.px(h.bin_start + h.bin_width * static_cast<double>(i + 1));
    const double yt = f.py(h.counts[i]);
    s += "<rect x=\"" + detail::svg_num(xl) + "\" y=\"" + detail::svg_num(yt) + "\" width=\"" +
         detail::svg_num(std::max(0.5, xr - xl - 1.0)) + "\" height=\"" +
         detail::svg_num(f.py(0) - yt) + "\" fill=\"#1f77b4\"/>\n";
  }
  f.axes(s, x_label, y_label);
  s += "</svg>\n";
  return s;
}

}  // namespace attnslice

#endif  // ATTNSLICE_SVG_HPP

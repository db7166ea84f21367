/*
 * Copyright (C) 2026 The AgeWatch Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace agewatch::cli {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 540;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void svg_header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
      << title << "</text>\n";
}

}  // namespace

void write_line_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<PlotSeries>& series) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const PlotSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (!std::isfinite(min_x)) {
    min_x = 0;
    max_x = 1;
    min_y = 0;
    max_y = 1;
  }
  if (max_x == min_x) max_x = min_x + 1;
  if (max_y == min_y) max_y = min_y + 1;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) { return kMarginLeft + (x - min_x) / (max_x - min_x) * plot_w; };
  auto sy = [&](double y) {
    return kMarginTop + plot_h - (y - min_y) / (max_y - min_y) * plot_h;
  };

  svg_header(out, title);
  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = min_x + (max_x - min_x) * i / 4.0;
    const double fy = min_y + (max_y - min_y) * i / 4.0;
    out << "<text x=\"" << sx(fx) << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << num(fx) << "</text>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << num(fy) << "</text>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << sy(fy) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << sy(fy)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& [x, y] : series[i].points) {
      out << num(sx(x)) << ',' << num(sy(y)) << ' ';
    }
    out << "\"/>\n";
    const double ly = kMarginTop + 16.0 * static_cast<double>(i);
    out << "<rect x=\"" << kMarginLeft + plot_w + 12 << "\" y=\"" << ly
        << "\" width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w + 30 << "\" y=\"" << ly + 6
        << "\" font-size=\"11\">" << series[i].label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_bar_chart(std::ostream& out, const std::string& title, const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars) {
  double max_y = 1.0;
  for (const auto& [label, value] : bars) {
    if (std::isfinite(value)) max_y = std::max(max_y, value);
  }
  const double plot_w = kWidth - kMarginLeft - 40;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;

  svg_header(out, title);
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fy = max_y * i / 4.0;
    const double y = kMarginTop + plot_h - fy / max_y * plot_h;
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << num(fy) << "</text>\n";
  }
  out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& [label, value] = bars[i];
    const bool inf = !std::isfinite(value);
    const double height = inf ? plot_h : std::max(0.0, value) / max_y * plot_h;
    const double x = kMarginLeft + slot * static_cast<double>(i) + slot * 0.2;
    const double y = kMarginTop + plot_h - height;
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.6)
        << "\" height=\"" << num(height) << "\" fill=\"" << color << "\""
        << (inf ? " fill-opacity=\"0.35\"" : "") << "/>\n";
    out << "<text x=\"" << num(x + slot * 0.3) << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << label << "</text>\n";
    out << "<text x=\"" << num(x + slot * 0.3) << "\" y=\"" << num(y - 6)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << (inf ? "inf" : num(value))
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace agewatch::cli

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "attrition/errors.hpp"

namespace attrition {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

inline const char* svg_color(std::size_t i) {
  static const char* palette[] = {"#c0392b", "#2980b9", "#27ae60",
                                  "#8e44ad", "#d35400", "#16a085"};
  return palette[i % 6];
}

inline const char* svg_dash(std::size_t i) {
  static const char* dashes[] = {"", "6,3", "2,3", "8,3,2,3"};
  return dashes[(i / 6) % 4];
}

}  // namespace detail

// Hand-emitted line chart, one polyline per series, x ticks at every
// distinct sample of the first series. 640x480 viewBox, no dependencies.
inline void write_line_chart(std::ostream& out, const std::vector<SvgSeries>& series,
                             const std::string& title, const std::string& x_label,
                             const std::string& y_label) {
  if (series.empty()) throw UsageError("svg chart: no series");
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double pad_y = 0.05 * (y_max - y_min);
  y_min -= pad_y;
  y_max += pad_y;

  const double left = 64, right = 620, top = 40, bottom = 430;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  auto py = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << detail::svg_num(left) << "\" y1=\"" << detail::svg_num(bottom)
      << "\" x2=\"" << detail::svg_num(right) << "\" y2=\"" << detail::svg_num(bottom)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << detail::svg_num(left) << "\" y1=\"" << detail::svg_num(top)
      << "\" x2=\"" << detail::svg_num(left) << "\" y2=\"" << detail::svg_num(bottom)
      << "\" stroke=\"black\"/>\n";
  // x ticks at every epoch of the first series
  for (double x : series.front().x) {
    out << "<line x1=\"" << detail::svg_num(px(x)) << "\" y1=\""
        << detail::svg_num(bottom) << "\" x2=\"" << detail::svg_num(px(x))
        << "\" y2=\"" << detail::svg_num(bottom + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::svg_num(px(x)) << "\" y=\""
        << detail::svg_num(bottom + 18) << "\" text-anchor=\"middle\" font-size=\"10\">"
        << detail::svg_num(x) << "</text>\n";
  }
  // y ticks, 5 divisions
  for (int i = 0; i <= 5; ++i) {
    const double y = y_min + (y_max - y_min) * i / 5.0;
    out << "<line x1=\"" << detail::svg_num(left - 5) << "\" y1=\""
        << detail::svg_num(py(y)) << "\" x2=\"" << detail::svg_num(left) << "\" y2=\""
        << detail::svg_num(py(y)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::svg_num(left - 8) << "\" y=\""
        << detail::svg_num(py(y) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
        << detail::svg_num(y) << "</text>\n";
  }
  out << "<text x=\"342\" y=\"462\" text-anchor=\"middle\" font-size=\"12\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"235\" text-anchor=\"middle\" font-size=\"12\" "
         "transform=\"rotate(-90 16 235)\">"
      << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << detail::svg_color(si) << "\"";
    if (*detail::svg_dash(si))
      out << " stroke-dasharray=\"" << detail::svg_dash(si) << "\"";
    out << " stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << " ";
      out << detail::svg_num(px(s.x[i])) << "," << detail::svg_num(py(s.y[i]));
    }
    out << "\"/>\n";
    // legend entry
    const double ly = top + 14.0 * static_cast<double>(si);
    out << "<line x1=\"" << detail::svg_num(right - 90) << "\" y1=\""
        << detail::svg_num(ly) << "\" x2=\"" << detail::svg_num(right - 70)
        << "\" y2=\"" << detail::svg_num(ly) << "\" stroke=\"" << detail::svg_color(si)
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << detail::svg_num(right - 65) << "\" y=\""
        << detail::svg_num(ly + 4) << "\" font-size=\"11\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

inline void write_line_chart(const std::filesystem::path& path,
                             const std::vector<SvgSeries>& series,
                             const std::string& title, const std::string& x_label,
                             const std::string& y_label) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_line_chart(out, series, title, x_label, y_label);
}

}  // namespace attrition

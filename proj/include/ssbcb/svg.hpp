// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal self-contained SVG charts: step/line curves and grouped bars.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssbcb/util.hpp"

namespace ssbcb::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

namespace detail {

inline const char* color(std::size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
  return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

inline std::string escape(const std::string& s) {
  std::string out;
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

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
  double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

inline std::string f2(double v) { return format_fixed(v, 2); }

inline void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::kW << "\" height=\"" << Frame::kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << Frame::kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  const double l = f.px(f.x0), r = f.px(f.x1), b = f.py(f.y0), t = f.py(f.y1);
  os << "<rect x=\"" << f2(l) << "\" y=\"" << f2(t) << "\" width=\"" << f2(r - l) << "\" height=\"" << f2(b - t)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0, yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << f2(f.px(xv)) << "\" y=\"" << f2(b + 16) << "\" text-anchor=\"middle\">" << format_fixed(xv, 3)
       << "</text>\n";
    os << "<text x=\"" << f2(l - 6) << "\" y=\"" << f2(f.py(yv) + 4) << "\" text-anchor=\"end\">" << format_fixed(yv, 3)
       << "</text>\n";
  }
  os << "<text x=\"" << f2((l + r) / 2) << "\" y=\"" << Frame::kH - 10 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << f2((t + b) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";
}

inline void legend(std::ostringstream& os, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = Frame::kTop + 14 + 18 * static_cast<double>(i);
    const double x = Frame::kW - Frame::kRight + 12;
    os << "<rect x=\"" << f2(x) << "\" y=\"" << f2(y - 9) << "\" width=\"12\" height=\"10\" fill=\"" << color(i)
       << "\"/>\n";
    os << "<text x=\"" << f2(x + 18) << "\" y=\"" << f2(y) << "\">" << escape(names[i]) << "</text>\n";
  }
}

inline std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
  const double pad = 0.02 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace detail

// Empirical-CDF style plot: each series is drawn as a staircase.
inline std::string step_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series) {
  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      lo = first ? x : std::min(lo, x);
      hi = first ? x : std::max(hi, x);
      first = false;
    }
  const auto [x0, x1] = detail::padded(lo, hi);
  const detail::Frame f{x0, x1, 0.0, 1.0};
  std::ostringstream os;
  detail::axes(os, f, title, xlabel, ylabel);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    names.push_back(series[i].name);
    if (series[i].points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << detail::color(i) << "\" stroke-width=\"1.5\" points=\"";
    double prev_y = 0.0;
    os << detail::f2(f.px(series[i].points.front().first)) << ',' << detail::f2(f.py(0.0));
    for (const auto& [x, y] : series[i].points) {
      os << ' ' << detail::f2(f.px(x)) << ',' << detail::f2(f.py(prev_y)) << ' ' << detail::f2(f.px(x)) << ','
         << detail::f2(f.py(y));
      prev_y = y;
    }
    os << "\"/>\n";
  }
  detail::legend(os, names);
  os << "</svg>\n";
  return os.str();
}

// Grouped bar chart; every series shares the same bin centers.
inline std::string bar_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series, double bin_width) {
  double lo = 0.0, hi = 0.0, top = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      lo = first ? x : std::min(lo, x);
      hi = first ? x : std::max(hi, x);
      top = std::max(top, y);
      first = false;
    }
  const detail::Frame f{lo - bin_width, hi + bin_width, 0.0, top * 1.05};
  std::ostringstream os;
  detail::axes(os, f, title, xlabel, ylabel);
  std::vector<std::string> names;
  const double group = series.empty() ? 1.0 : static_cast<double>(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    names.push_back(series[i].name);
    for (const auto& [x, y] : series[i].points) {
      const double left = x - bin_width / 2 + bin_width * static_cast<double>(i) / group;
      const double px0 = f.px(left), px1 = f.px(left + bin_width / group);
      os << "<rect x=\"" << detail::f2(px0) << "\" y=\"" << detail::f2(f.py(y)) << "\" width=\""
         << detail::f2(std::max(0.5, px1 - px0)) << "\" height=\"" << detail::f2(f.py(0.0) - f.py(y))
         << "\" fill=\"" << detail::color(i) << "\" fill-opacity=\"0.8\"/>\n";
    }
  }
  detail::legend(os, names);
  os << "</svg>\n";
  return os.str();
}

}  // namespace ssbcb::svg

// Copyright 2026 The cimsnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cimsnn::cli {

namespace {

constexpr double kW = 640;
constexpr double kH = 400;
constexpr double kLeft = 80;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

double tr(double v, bool log_y) { return log_y ? std::log10(std::max(v, 1e-300)) : v; }

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x1 == x0 ? 0.5 : (x - x0) / (x1 - x0)) * (kW - kLeft - kRight);
  }
  double py(double y) const {
    return kH - kBottom - (y1 == y0 ? 0.5 : (y - y0) / (y1 - y0)) * (kH - kTop - kBottom);
  }
};

void header(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n";
}

void axes(std::ostringstream& o, const Frame& f, const std::string& x_label,
          const std::string& y_label, bool log_y, bool x_ticks) {
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
    << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    const std::string label = log_y ? "1e" + fmt(y) : fmt(y);
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(y) + 4
      << "\" text-anchor=\"end\">" << label << "</text>\n";
    if (x_ticks) {
      const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
      o << "<text x=\"" << f.px(x) << "\" y=\"" << kH - kBottom + 18
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
    }
  }
  o << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 15
    << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << (kTop + kH - kBottom) / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (kTop + kH - kBottom) / 2
    << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& o, const std::vector<Series>& series) {
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 18 * static_cast<double>(i);
    o << "<rect x=\"" << kW - kRight + 12 << "\" y=\"" << y - 9
      << "\" width=\"12\" height=\"12\" fill=\"" << kColors[i % 5] << "\"/>\n"
      << "<text x=\"" << kW - kRight + 30 << "\" y=\"" << y + 1 << "\">"
      << escape(series[i].name) << "</text>\n";
  }
}

void y_range(const std::vector<Series>& series, bool log_y, bool from_zero,
             double* lo, double* hi) {
  *lo = 1e300;
  *hi = -1e300;
  for (const Series& s : series) {
    for (double v : s.y) {
      *lo = std::min(*lo, tr(v, log_y));
      *hi = std::max(*hi, tr(v, log_y));
    }
  }
  if (*lo > *hi) {
    *lo = 0;
    *hi = 1;
  }
  if (from_zero && !log_y) *lo = std::min(*lo, 0.0);
  if (log_y) {
    *lo = std::floor(*lo);
    *hi = std::ceil(*hi);
  }
  if (*hi == *lo) *hi = *lo + 1;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series, bool log_y) {
  Frame f{1e300, -1e300, 0, 1};
  for (const Series& s : series) {
    for (double x : s.x) {
      f.x0 = std::min(f.x0, x);
      f.x1 = std::max(f.x1, x);
    }
  }
  if (f.x0 > f.x1) {
    f.x0 = 0;
    f.x1 = 1;
  }
  y_range(series, log_y, false, &f.y0, &f.y1);
  std::ostringstream o;
  header(o, title);
  axes(o, f, x_label, y_label, log_y, true);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    o << "<polyline fill=\"none\" stroke=\"" << kColors[i % 5] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      o << (j ? " " : "") << fmt(f.px(s.x[j])) << "," << fmt(f.py(tr(s.y[j], log_y)));
    }
    o << "\"/>\n";
  }
  legend(o, series);
  o << "</svg>\n";
  return o.str();
}

std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& categories,
                          const std::vector<Series>& series, bool log_y) {
  Frame f{0, 1, 0, 1};
  y_range(series, log_y, true, &f.y0, &f.y1);
  std::ostringstream o;
  header(o, title);
  axes(o, f, "", y_label, log_y, false);
  const double plot_w = kW - kLeft - kRight;
  const double group_w = categories.empty() ? plot_w : plot_w / categories.size();
  const double bar_w = series.empty() ? 0 : 0.8 * group_w / series.size();
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = kLeft + group_w * c + 0.1 * group_w;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (c >= series[i].y.size()) continue;
      const double top = f.py(tr(series[i].y[c], log_y));
      const double base = f.py(f.y0);
      o << "<rect x=\"" << fmt(gx + bar_w * i) << "\" y=\"" << fmt(std::min(top, base))
        << "\" width=\"" << fmt(bar_w) << "\" height=\"" << fmt(std::abs(base - top))
        << "\" fill=\"" << kColors[i % 5] << "\"/>\n";
    }
    o << "<text x=\"" << fmt(gx + 0.4 * group_w) << "\" y=\"" << kH - kBottom + 18
      << "\" text-anchor=\"middle\">" << escape(categories[c]) << "</text>\n";
  }
  legend(o, series);
  o << "</svg>\n";
  return o.str();
}

}  // namespace cimsnn::cli

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

#ifndef CIMSNN_TOOLS_SVG_HPP_
#define CIMSNN_TOOLS_SVG_HPP_

#include <string>
#include <vector>

namespace cimsnn::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line chart; log_y plots log10(y) with decade labels.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series, bool log_y = false);

// Grouped bars: one group per category, one bar per series.
std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& categories,
                          const std::vector<Series>& series, bool log_y = false);

}  // namespace cimsnn::cli

#endif  // CIMSNN_TOOLS_SVG_HPP_

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

#include "cimsnn/geometry.hpp"

#include <algorithm>
#include <string>

#include "cimsnn/errors.hpp"

namespace cimsnn {

ArrayGeometry::ArrayGeometry(int rows, int cols, int neurons, int subbanks,
                             int monitor_cells)
    : rows_(rows),
      cols_(cols),
      neurons_(neurons),
      subbanks_(subbanks),
      monitor_cells_(monitor_cells) {
  if (rows < 1 || cols < 1 || neurons < 1 || subbanks < 1) {
    throw ConfigError("array geometry: rows, cols, neurons and subbanks must be >= 1");
  }
  if (monitor_cells < 1 || monitor_cells > rows) {
    throw ConfigError("array geometry: monitor_cells must be in [1, rows]");
  }
  if (cols < 3 * subbanks) {
    throw ConfigError("array geometry: need at least 3 columns per subbank");
  }
  for (int s = 0; s < subbanks_; ++s) {
    const int end = s + 1 < subbanks_ ? subbank_begin(s + 1) : cols_;
    for (int c = subbank_begin(s) + 1; c + 1 < end; c += 2) {
      pairs_.push_back({c, c + 1, s});
    }
  }
}

ArrayGeometry ArrayGeometry::scaled(int rows, int cols) {
  if (rows < 1 || cols < 3) {
    throw ConfigError("array geometry: need rows >= 1 and cols >= 3");
  }
  const int subbanks = std::clamp(cols / 20, 1, 64);
  const int monitor = std::min(10, rows);
  ArrayGeometry probe(rows, cols, 1, subbanks, monitor);
  const int neurons = std::min(128, probe.pair_count());
  return ArrayGeometry(rows, cols, std::max(neurons, 1), subbanks, monitor);
}

int ArrayGeometry::subbank_begin(int subbank) const {
  const long long num = static_cast<long long>(subbank) * cols_;
  return static_cast<int>((num + subbanks_ - 1) / subbanks_);
}

int ArrayGeometry::subbank_of_column(int col) const {
  return static_cast<int>(static_cast<long long>(col) * subbanks_ / cols_);
}

bool ArrayGeometry::is_monitor_column(int col) const {
  return monitor_column(subbank_of_column(col)) == col;
}

}  // namespace cimsnn

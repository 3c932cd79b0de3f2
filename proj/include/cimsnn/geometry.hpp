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

#ifndef CIMSNN_GEOMETRY_HPP_
#define CIMSNN_GEOMETRY_HPP_

#include <vector>

namespace cimsnn {

// A ternary weight column realized as two bitlines inside one subbank.
struct ColumnPair {
  int pos_col = 0;
  int neg_col = 0;
  int subbank = 0;
};

// Column layout of the macro. Columns are split into near-equal subbanks;
// the first column of each subbank is its monitor column and the remaining
// columns pair up as (positive, negative) bitlines. An odd leftover column
// in a subbank is left as a spare.
class ArrayGeometry {
 public:
  static constexpr int kReplicaCellsPerNeuron = 5;

  ArrayGeometry() : ArrayGeometry(1024, 1304, 128, 64, 10) {}
  ArrayGeometry(int rows, int cols, int neurons, int subbanks,
                int monitor_cells);

  // Picks a subbank count proportional to the column budget (about 20
  // columns each, at most 64) and keeps the default neuron count if it fits.
  static ArrayGeometry scaled(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int neurons() const { return neurons_; }
  int subbanks() const { return subbanks_; }
  int monitor_cells() const { return monitor_cells_; }

  int subbank_begin(int subbank) const;
  int subbank_of_column(int col) const;
  int monitor_column(int subbank) const { return subbank_begin(subbank); }
  bool is_monitor_column(int col) const;

  int pair_count() const { return static_cast<int>(pairs_.size()); }
  const ColumnPair& pair(int p) const { return pairs_.at(p); }
  int neuron_site(int p) const { return p % neurons_; }

  bool operator==(const ArrayGeometry& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && neurons_ == o.neurons_ &&
           subbanks_ == o.subbanks_ && monitor_cells_ == o.monitor_cells_;
  }

 private:
  int rows_;
  int cols_;
  int neurons_;
  int subbanks_;
  int monitor_cells_;
  std::vector<ColumnPair> pairs_;
};

}  // namespace cimsnn

#endif  // CIMSNN_GEOMETRY_HPP_

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

#ifndef CIMSNN_CIM_ARRAY_HPP_
#define CIMSNN_CIM_ARRAY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cimsnn/device_model.hpp"
#include "cimsnn/geometry.hpp"
#include "cimsnn/model_ir.hpp"

namespace cimsnn {

enum class ArrayMode { kDataAccess, kCim };

// Differential bitline currents of one column pair. The *_units fields carry
// the same charge expressed in regulated unit-cell currents, which is what
// the neuron integrates; i_pos == pos_units * unit_current.
struct MacResult {
  double i_pos = 0.0;
  double i_neg = 0.0;
  int activated_rows = 0;
  double pos_units = 0.0;
  double neg_units = 0.0;
  double unit_current = 0.0;

  double net_units() const { return pos_units - neg_units; }
};

struct ThresholdCurrent {
  double current = 0.0;
  double units = 0.0;
};

// Dense view of a mapped layer as the analog plane sees it: for an input
// row vector x the pair delivers sum_r weight[o][r] * x[r] + bias[o] units.
struct EffectiveLayer {
  int outputs = 0;
  int rows = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  std::vector<double> threshold;
};

class CimArray {
 public:
  CimArray(ArrayGeometry geometry, DeviceParams params, std::uint64_t seed);

  const ArrayGeometry& geometry() const { return geometry_; }
  const DeviceParams& params() const { return params_; }
  const MismatchSample& mismatch() const { return mismatch_; }
  ArrayMode mode() const { return mode_; }
  const std::vector<std::string>& events() const { return events_; }

  // Weight rows of a layer are laid out as k * in_channels + c inside the
  // placement's row band. Requires data-access mode.
  void program_layer(const LayerPlacement& placement, const TernaryWeights& w);
  void program(const MappingPlan& plan, const NetworkIR& net, int page = 0);
  TernaryWeights read_layer(const LayerPlacement& placement, int in_channels,
                            int kernel) const;

  bool cell(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * geometry_.cols() + col] != 0;
  }
  int read_weight(int row, int pair) const;

  // WM_E falls, a guard interval elapses, CM_E rises; the distributed
  // regulators then settle for `celsius`.
  void enter_cim_mode(double celsius);
  void enter_data_access_mode();
  // Re-solves every subbank regulator for a new die temperature.
  void set_temperature(double celsius);

  const RegulatorSolution& regulator(int subbank) const;
  double solved_temperature() const { return solved_celsius_; }

  MacResult mac(std::span<const std::uint8_t> row_mask, int pair,
                double celsius) const;
  // Same as mac() with the active rows given as a list of row indices.
  MacResult mac_rows(std::span<const int> active_rows, int pair,
                     double celsius) const;

  // Five replica cells of the pair's neuron site at the subbank supply.
  ThresholdCurrent threshold_current(int pair, double celsius) const;

  EffectiveLayer effective_layer(const LayerPlacement& placement) const;

 private:
  void require_mac_ready(double celsius) const;
  void set_cell(int row, int col, bool v);
  MacResult finish(double pos_on, double neg_on, int active,
                   const ColumnPair& cp) const;

  ArrayGeometry geometry_;
  DeviceParams params_;
  MismatchSample mismatch_;
  MismatchSample replica_;
  std::vector<std::uint8_t> bits_;
  std::vector<double> column_gain_;
  std::vector<RegulatorSolution> regulators_;
  ArrayMode mode_ = ArrayMode::kDataAccess;
  bool solved_ = false;
  double solved_celsius_ = 0.0;
  std::vector<std::string> events_;
};

struct RegulationPoint {
  double celsius = 0.0;
  double v_r_mean = 0.0;
  double v_r_min = 0.0;
  double v_r_max = 0.0;
  // Means over seeds and subbanks.
  double monitor_current = 0.0;    // servoed monitor-cell mean at V_R
  double unit_current = 0.0;       // gain-1 cell at V_R
  double fixed_supply_current = 0.0;  // monitor mean at each bank's V_R(25 C)
  double leakage_regulated = 0.0;  // one bitline of off cells at V_R
  double leakage_nominal = 0.0;    // same at v_max
};

// Regulator behaviour of `seeds` mismatch draws of the array, seeded as
// CimArray(geometry, params, hash_key({base_seed, i})) would be. Only the
// monitor rows are sampled.
std::vector<RegulationPoint> regulation_sweep(const ArrayGeometry& geometry,
                                              const DeviceParams& params,
                                              std::span<const double> celsius,
                                              int seeds, std::uint64_t base_seed);

}  // namespace cimsnn

#endif  // CIMSNN_CIM_ARRAY_HPP_

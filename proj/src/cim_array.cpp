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

#include "cimsnn/cim_array.hpp"

#include <string>

#include "cimsnn/errors.hpp"
#include "cimsnn/random.hpp"

namespace cimsnn {

CimArray::CimArray(ArrayGeometry geometry, DeviceParams params,
                   std::uint64_t seed)
    : geometry_(geometry),
      params_(params),
      mismatch_(sample_mismatch(geometry.rows(), geometry.cols(),
                                params.sigma_mismatch, seed)),
      replica_(sample_mismatch(geometry.neurons(),
                               ArrayGeometry::kReplicaCellsPerNeuron,
                               params.sigma_mismatch,
                               hash_key({seed, 0x7265706cULL}))),
      bits_(static_cast<std::size_t>(geometry.rows()) * geometry.cols(), 0),
      column_gain_(geometry.cols(), 0.0) {
  params_.validate();
  for (int s = 0; s < geometry_.subbanks(); ++s) {
    const int col = geometry_.monitor_column(s);
    for (int r = 0; r < geometry_.monitor_cells(); ++r) set_cell(r, col, true);
  }
  for (int r = 0; r < geometry_.rows(); ++r) {
    for (int c = 0; c < geometry_.cols(); ++c) {
      column_gain_[c] += mismatch_.gain(r, c);
    }
  }
}

void CimArray::set_cell(int row, int col, bool v) {
  bits_[static_cast<std::size_t>(row) * geometry_.cols() + col] = v ? 1 : 0;
}

void CimArray::program_layer(const LayerPlacement& placement,
                             const TernaryWeights& w) {
  if (mode_ != ArrayMode::kDataAccess) {
    throw ModeError("mode violation: weights can only be written in data-access mode");
  }
  if (w.out != placement.pairs || w.in * w.kernel != placement.rows) {
    throw ShapeError("program_layer: weight tensor does not match the placement");
  }
  if (placement.row_offset < 0 ||
      placement.row_offset + placement.rows > geometry_.rows() ||
      placement.pair_offset < 0 ||
      placement.pair_offset + placement.pairs > geometry_.pair_count()) {
    throw MappingError("program_layer: placement outside the array");
  }
  for (int o = 0; o < w.out; ++o) {
    const ColumnPair& cp = geometry_.pair(placement.pair_offset + o);
    for (int k = 0; k < w.kernel; ++k) {
      for (int c = 0; c < w.in; ++c) {
        const int row = placement.row_offset + k * w.in + c;
        const int v = w.at(o, c, k);
        set_cell(row, cp.pos_col, v > 0);
        set_cell(row, cp.neg_col, v < 0);
      }
    }
  }
}

void CimArray::program(const MappingPlan& plan, const NetworkIR& net, int page) {
  for (const LayerPlacement& p : plan.placements) {
    if (p.page != page) continue;
    program_layer(p, net.weights_for(p.layer));
  }
}

TernaryWeights CimArray::read_layer(const LayerPlacement& placement,
                                    int in_channels, int kernel) const {
  TernaryWeights w(placement.pairs, in_channels, kernel);
  for (int o = 0; o < w.out; ++o) {
    for (int k = 0; k < kernel; ++k) {
      for (int c = 0; c < in_channels; ++c) {
        w.at(o, c, k) = static_cast<std::int8_t>(
            read_weight(placement.row_offset + k * in_channels + c,
                        placement.pair_offset + o));
      }
    }
  }
  return w;
}

int CimArray::read_weight(int row, int pair) const {
  const ColumnPair& cp = geometry_.pair(pair);
  return static_cast<int>(cell(row, cp.pos_col)) -
         static_cast<int>(cell(row, cp.neg_col));
}

void CimArray::enter_cim_mode(double celsius) {
  if (mode_ == ArrayMode::kCim) {
    set_temperature(celsius);
    return;
  }
  events_.push_back("WM_E low");
  events_.push_back("guard");
  events_.push_back("CM_E high");
  mode_ = ArrayMode::kCim;
  set_temperature(celsius);
}

void CimArray::enter_data_access_mode() {
  if (mode_ == ArrayMode::kDataAccess) return;
  events_.push_back("CM_E low");
  events_.push_back("guard");
  events_.push_back("WM_E high");
  mode_ = ArrayMode::kDataAccess;
}

void CimArray::set_temperature(double celsius) {
  if (mode_ != ArrayMode::kCim) {
    throw ModeError("mode violation: regulators only run in cim mode");
  }
  std::vector<RegulatorSolution> sols;
  std::vector<double> gains(geometry_.monitor_cells());
  for (int s = 0; s < geometry_.subbanks(); ++s) {
    const int col = geometry_.monitor_column(s);
    for (int r = 0; r < geometry_.monitor_cells(); ++r) {
      gains[r] = mismatch_.gain(r, col);
    }
    sols.push_back(solve_regulator(celsius, gains, params_));
  }
  regulators_ = std::move(sols);
  solved_ = true;
  solved_celsius_ = celsius;
}

const RegulatorSolution& CimArray::regulator(int subbank) const {
  if (!solved_) throw RegulatorError("regulator not solved");
  return regulators_.at(subbank);
}

void CimArray::require_mac_ready(double celsius) const {
  if (mode_ != ArrayMode::kCim) {
    throw ModeError("mode violation: mac requires cim mode");
  }
  if (!solved_ || solved_celsius_ != celsius) {
    throw RegulatorError("regulator not solved for " + std::to_string(celsius) +
                         " C");
  }
}

MacResult CimArray::finish(double pos_on, double neg_on, int active,
                           const ColumnPair& cp) const {
  const double lf = params_.leak_fraction;
  MacResult m;
  m.activated_rows = active;
  m.pos_units = (1.0 - lf) * pos_on + lf * column_gain_[cp.pos_col];
  m.neg_units = (1.0 - lf) * neg_on + lf * column_gain_[cp.neg_col];
  m.unit_current = regulators_[cp.subbank].unit_current;
  m.i_pos = m.pos_units * m.unit_current;
  m.i_neg = m.neg_units * m.unit_current;
  return m;
}

MacResult CimArray::mac(std::span<const std::uint8_t> row_mask, int pair,
                        double celsius) const {
  require_mac_ready(celsius);
  if (static_cast<int>(row_mask.size()) > geometry_.rows()) {
    throw ShapeError("mac: input mask longer than the array rows");
  }
  const ColumnPair& cp = geometry_.pair(pair);
  double pos_on = 0.0;
  double neg_on = 0.0;
  int active = 0;
  for (int r = 0; r < static_cast<int>(row_mask.size()); ++r) {
    if (!row_mask[r]) continue;
    ++active;
    if (cell(r, cp.pos_col)) pos_on += mismatch_.gain(r, cp.pos_col);
    if (cell(r, cp.neg_col)) neg_on += mismatch_.gain(r, cp.neg_col);
  }
  return finish(pos_on, neg_on, active, cp);
}

MacResult CimArray::mac_rows(std::span<const int> active_rows, int pair,
                             double celsius) const {
  require_mac_ready(celsius);
  const ColumnPair& cp = geometry_.pair(pair);
  double pos_on = 0.0;
  double neg_on = 0.0;
  for (int r : active_rows) {
    if (r < 0 || r >= geometry_.rows()) throw ShapeError("mac: row out of range");
    if (cell(r, cp.pos_col)) pos_on += mismatch_.gain(r, cp.pos_col);
    if (cell(r, cp.neg_col)) neg_on += mismatch_.gain(r, cp.neg_col);
  }
  return finish(pos_on, neg_on, static_cast<int>(active_rows.size()), cp);
}

ThresholdCurrent CimArray::threshold_current(int pair, double celsius) const {
  require_mac_ready(celsius);
  const int site = geometry_.neuron_site(pair);
  ThresholdCurrent th;
  for (int j = 0; j < ArrayGeometry::kReplicaCellsPerNeuron; ++j) {
    th.units += replica_.gain(site, j);
  }
  th.current = th.units * regulators_[geometry_.pair(pair).subbank].unit_current;
  return th;
}

EffectiveLayer CimArray::effective_layer(const LayerPlacement& placement) const {
  const double lf = params_.leak_fraction;
  EffectiveLayer e;
  e.outputs = placement.pairs;
  e.rows = placement.rows;
  e.weight.assign(static_cast<std::size_t>(e.outputs) * e.rows, 0.0);
  e.bias.assign(e.outputs, 0.0);
  e.threshold.assign(e.outputs, 0.0);
  for (int o = 0; o < e.outputs; ++o) {
    const int pair = placement.pair_offset + o;
    const ColumnPair& cp = geometry_.pair(pair);
    for (int r = 0; r < e.rows; ++r) {
      const int row = placement.row_offset + r;
      double v = 0.0;
      if (cell(row, cp.pos_col)) v += mismatch_.gain(row, cp.pos_col);
      if (cell(row, cp.neg_col)) v -= mismatch_.gain(row, cp.neg_col);
      e.weight[static_cast<std::size_t>(o) * e.rows + r] = (1.0 - lf) * v;
    }
    e.bias[o] = lf * (column_gain_[cp.pos_col] - column_gain_[cp.neg_col]);
    const int site = geometry_.neuron_site(pair);
    for (int j = 0; j < ArrayGeometry::kReplicaCellsPerNeuron; ++j) {
      e.threshold[o] += replica_.gain(site, j);
    }
  }
  return e;
}

std::vector<RegulationPoint> regulation_sweep(const ArrayGeometry& geometry,
                                              const DeviceParams& params,
                                              std::span<const double> celsius,
                                              int seeds, std::uint64_t base_seed) {
  params.validate();
  if (seeds < 1) throw ConfigError("regulation_sweep: seeds must be >= 1");
  const int banks = geometry.subbanks();
  const int cells = geometry.monitor_cells();
  std::vector<std::vector<double>> monitors;
  for (int i = 0; i < seeds; ++i) {
    const MismatchSample m =
        sample_mismatch(cells, geometry.cols(), params.sigma_mismatch,
                        hash_key({base_seed, static_cast<std::uint64_t>(i)}));
    for (int s = 0; s < banks; ++s) {
      std::vector<double> g(cells);
      for (int r = 0; r < cells; ++r) g[r] = m.gain(r, geometry.monitor_column(s));
      monitors.push_back(std::move(g));
    }
  }
  std::vector<double> v_fixed;
  for (const auto& g : monitors) v_fixed.push_back(solve_regulator(25.0, g, params).v_r);

  const std::int64_t off_cells = geometry.rows();
  std::vector<RegulationPoint> out;
  for (double t : celsius) {
    RegulationPoint pt;
    pt.celsius = t;
    pt.v_r_min = 1e300;
    pt.v_r_max = -1e300;
    for (std::size_t b = 0; b < monitors.size(); ++b) {
      const RegulatorSolution sol = solve_regulator(t, monitors[b], params);
      pt.v_r_mean += sol.v_r;
      pt.v_r_min = std::min(pt.v_r_min, sol.v_r);
      pt.v_r_max = std::max(pt.v_r_max, sol.v_r);
      pt.monitor_current += sol.monitor_current;
      pt.unit_current += sol.unit_current;
      double fixed = 0.0;
      for (double g : monitors[b]) fixed += cell_current(v_fixed[b], t, g, params);
      pt.fixed_supply_current += fixed / cells;
      pt.leakage_regulated += leakage_current(off_cells, sol.v_r, t, params);
      pt.leakage_nominal += leakage_current(off_cells, params.v_max, t, params);
    }
    const double n = static_cast<double>(monitors.size());
    pt.v_r_mean /= n;
    pt.monitor_current /= n;
    pt.unit_current /= n;
    pt.fixed_supply_current /= n;
    pt.leakage_regulated /= n;
    pt.leakage_nominal /= n;
    out.push_back(pt);
  }
  return out;
}

}  // namespace cimsnn

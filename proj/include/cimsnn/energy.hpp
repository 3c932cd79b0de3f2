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

#ifndef CIMSNN_ENERGY_HPP_
#define CIMSNN_ENERGY_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cimsnn/model_ir.hpp"

namespace cimsnn {

struct EnergyParams {
  double e_sop = 0.647e-12;  // J
  double p_sa = 25.2e-6;     // W per sense amplifier
  double p_ith = 0.9e-6;     // W per threshold generator
  int n_neurons = 128;
  double p_chip = 12.39e-3;  // W
  double clock_hz = 71e6;
  bool include_static = true;
  double input_bits = 1.0;
  double weight_bits = 1.5;
  double process_nm = 28.0;

  void validate() const;
};

inline constexpr double kOpsPerSop = 2.0;

struct EnergySummary {
  std::int64_t total_sops = 0;
  std::int64_t duration_cycles = 0;
  double duration_s = 0.0;
  std::map<std::string, double> block_energy_j;
  double energy_j = 0.0;
  double inference_energy_j = 0.0;
  double pj_per_sop = 0.0;
  double tops_per_w = 0.0;
  double tops_per_w_normalized = 0.0;
  // Share of each block in energy_j.
  std::map<std::string, double> fractions;
};

// Synaptic events (input spike x nonzero weight) of every CIM layer.
// `layer_inputs[i]` is the spike input of layer i; entries of non-CIM layers
// are ignored.
std::int64_t count_sops(const NetworkIR& net,
                        const std::vector<SpikeTensor>& layer_inputs);

EnergySummary summarize_energy(std::int64_t sops, std::int64_t duration_cycles,
                               const EnergyParams& params);

// n_neurons x p_ith over the reference chip power.
double threshold_generator_power_fraction(const EnergyParams& params);

// TOPS/W x input bits x weight bits x (process / 28 nm)^2.
double normalized_tops_per_w(double tops_per_w, double input_bits,
                             double weight_bits, double process_nm);

// Energy of one unit-current MAC slot: v_r * i_unit over one clock period.
double device_energy_per_sop(double v_r, double i_unit, double clock_hz);

struct AreaCheck {
  double overhead_um2 = 364.0;
  double chip_mm2 = 3.28;
  double quoted_percent = 0.0011;
  double computed_percent = 0.0;
  bool consistent = false;
};

AreaCheck threshold_area_check();

}  // namespace cimsnn

#endif  // CIMSNN_ENERGY_HPP_

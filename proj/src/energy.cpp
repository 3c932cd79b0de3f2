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

#include "cimsnn/energy.hpp"

#include <cmath>

#include "cimsnn/errors.hpp"

namespace cimsnn {

void EnergyParams::validate() const {
  if (!(e_sop > 0 && p_sa > 0 && p_ith > 0 && p_chip > 0 && clock_hz > 0 &&
        n_neurons > 0 && input_bits > 0 && weight_bits > 0 && process_nm > 0)) {
    throw ConfigError("energy parameters must all be positive");
  }
}

std::int64_t count_sops(const NetworkIR& net,
                        const std::vector<SpikeTensor>& layer_inputs) {
  std::int64_t sops = 0;
  for (std::size_t i : net.cim_layers()) {
    if (i >= layer_inputs.size() || layer_inputs[i].empty()) continue;
    const LayerSpec& l = net.layers()[i];
    const TernaryWeights& w = net.weights_for(i);
    const SpikeTensor& in = layer_inputs[i];
    if (in.channels() != l.in_channels) {
      throw ShapeError("count_sops: trace channels do not match the layer");
    }
    const int P = net.shapes()[i].out_length;
    // Nonzero fan-out of each (channel, tap).
    std::vector<std::int64_t> fanout(static_cast<std::size_t>(l.in_channels) * l.kernel, 0);
    for (int o = 0; o < w.out; ++o) {
      for (int c = 0; c < w.in; ++c) {
        for (int k = 0; k < w.kernel; ++k) {
          if (w.at(o, c, k) != 0) ++fanout[static_cast<std::size_t>(c) * l.kernel + k];
        }
      }
    }
    for (int t = 0; t < in.timesteps(); ++t) {
      for (int p = 0; p < P; ++p) {
        for (int k = 0; k < l.kernel; ++k) {
          const int pos = p * l.stride + k - l.padding;
          if (pos < 0 || pos >= in.length()) continue;
          for (int c = 0; c < l.in_channels; ++c) {
            if (in.at(t, c, pos)) sops += fanout[static_cast<std::size_t>(c) * l.kernel + k];
          }
        }
      }
    }
  }
  return sops;
}

EnergySummary summarize_energy(std::int64_t sops, std::int64_t duration_cycles,
                               const EnergyParams& params) {
  params.validate();
  if (sops < 0 || duration_cycles < 0) {
    throw ConfigError("summarize_energy: counts must be >= 0");
  }
  EnergySummary s;
  s.total_sops = sops;
  s.duration_cycles = duration_cycles;
  s.duration_s = static_cast<double>(duration_cycles) / params.clock_hz;
  s.block_energy_j["synaptic"] = static_cast<double>(sops) * params.e_sop;
  if (params.include_static) {
    s.block_energy_j["sense_amplifiers"] = params.n_neurons * params.p_sa * s.duration_s;
    s.block_energy_j["threshold_generators"] =
        params.n_neurons * params.p_ith * s.duration_s;
  }
  for (const auto& [name, e] : s.block_energy_j) s.energy_j += e;
  s.inference_energy_j = s.energy_j;
  if (sops > 0) {
    s.pj_per_sop = s.energy_j / static_cast<double>(sops) * 1e12;
    s.tops_per_w = kOpsPerSop * static_cast<double>(sops) / s.energy_j * 1e-12;
    s.tops_per_w_normalized = normalized_tops_per_w(
        s.tops_per_w, params.input_bits, params.weight_bits, params.process_nm);
  }
  for (const auto& [name, e] : s.block_energy_j) {
    s.fractions[name] = s.energy_j > 0 ? e / s.energy_j : 0.0;
  }
  return s;
}

double threshold_generator_power_fraction(const EnergyParams& params) {
  params.validate();
  return params.n_neurons * params.p_ith / params.p_chip;
}

double normalized_tops_per_w(double tops_per_w, double input_bits,
                             double weight_bits, double process_nm) {
  const double scale = process_nm / 28.0;
  return tops_per_w * input_bits * weight_bits * scale * scale;
}

double device_energy_per_sop(double v_r, double i_unit, double clock_hz) {
  return v_r * i_unit / clock_hz;
}

AreaCheck threshold_area_check() {
  AreaCheck a;
  a.computed_percent = a.overhead_um2 / (a.chip_mm2 * 1e6) * 100.0;
  a.consistent = std::abs(a.computed_percent - a.quoted_percent) <
                 0.05 * a.quoted_percent;
  return a;
}

}  // namespace cimsnn

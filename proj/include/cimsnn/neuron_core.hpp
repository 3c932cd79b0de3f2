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

#ifndef CIMSNN_NEURON_CORE_HPP_
#define CIMSNN_NEURON_CORE_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "cimsnn/cim_array.hpp"
#include "cimsnn/model_ir.hpp"
#include "cimsnn/schedule_mode.hpp"

namespace cimsnn {

inline constexpr int kThresholdUnits = ArrayGeometry::kReplicaCellsPerNeuron;

// V[t] = V[t-1] * (1 - S[t-1]) + input
inline double integrate_membrane(double v_prev, bool spiked_prev,
                                 double input) {
  return (spiked_prev ? 0.0 : v_prev) + input;
}

// S[t] = [V[t] + offset + noise >= threshold]
inline bool spike_decision(double v, double threshold, double offset,
                           double noise) {
  return v + offset + noise >= threshold;
}

enum class Phase { kPreset, kIntegrate, kCompare, kHold };

struct NeuronState {
  double v_mem = 0.0;
  double threshold_charge = 0.0;
  Phase phase = Phase::kPreset;
  int t_in_batch = 0;
  bool last_spike = false;
  double sa_offset = 0.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t draws = 0;
};

struct SpikeRecord {
  int neuron_index = 0;
  int timestep = 0;
  bool fired = false;
};

// One preset/integrate/compare/hold cycle. The threshold charge is injected
// at the start of a batch and re-armed after a spike; the membrane resets
// after a spike (V times one minus the previous spike) and at the end of a batch.
// Throws PhaseError unless the state sits between cycles.
std::pair<NeuronState, SpikeRecord> neuron_step(const NeuronState& state,
                                                const MacResult& mac,
                                                const ThresholdCurrent& i_th,
                                                double noise_sigma,
                                                int timesteps,
                                                int neuron_index = 0);

// Static comparator offsets per neuron site plus a per-comparison noise
// level, both in mV at the comparator input.
struct SaNonidealities {
  std::vector<double> offset_mv;
  double noise_mv_rms = 0.0;
  double mv_per_unit = 10.0;
  std::uint64_t seed = 0;

  // `unit_scale` is the actual unit current over its target; a larger unit
  // current moves the comparator input further per unit.
  double offset_units(int site, double unit_scale) const;
  double noise_units(double unit_scale) const;
  double noise_sample_mv(std::uint64_t key, std::uint64_t index) const;
};

inline constexpr double kDefaultSaOffsetMv = 7.28;
inline constexpr double kDefaultSaNoiseMv = 1.0;
inline constexpr double kDefaultMvPerUnit = 10.0;

SaNonidealities sample_sa_nonidealities(int n_neurons, double offset_sigma_mv,
                                        double noise_mv_rms, double mv_per_unit,
                                        std::uint64_t seed);

// Real-valued accumulator outputs indexed (channel, position).
struct Potentials {
  int channels = 0;
  int length = 0;
  std::vector<double> v;

  Potentials() = default;
  Potentials(int c, int l) : channels(c), length(l), v(static_cast<std::size_t>(c) * l, 0.0) {}
  double& at(int c, int l) { return v[static_cast<std::size_t>(c) * length + l]; }
  double at(int c, int l) const { return v[static_cast<std::size_t>(c) * length + l]; }
  bool operator==(const Potentials&) const = default;
};

struct LayerRunOptions {
  double celsius = 25.0;
  const SaNonidealities* sa = nullptr;
  ScheduleMode order = ScheduleMode::kStrideTick;
  std::uint64_t noise_seed = 0;
};

// Binary spikes of a conv1d layer mapped at `placement`.
SpikeTensor run_layer(const LayerSpec& layer, const LayerPlacement& placement,
                      const SpikeTensor& input, const CimArray& array,
                      const LayerRunOptions& opts, int layer_index = 0);

// Membrane charge of an accumulate-head summed over all timesteps.
Potentials run_accumulate_head(const LayerSpec& layer,
                               const LayerPlacement& placement,
                               const SpikeTensor& input, const CimArray& array,
                               const LayerRunOptions& opts);

// OR-reduction over non-overlapping windows.
SpikeTensor max_pool(const SpikeTensor& input, int pool);
Potentials avg_pool(const Potentials& input, int pool);
// Spike counts over time, used when no accumulate-head ends the network.
Potentials spike_counts(const SpikeTensor& spikes);
std::vector<double> classify(const TernaryWeights& w, const Potentials& features);
int argmax(const std::vector<double>& scores);

struct NetworkRun {
  // Input of every layer that consumes spikes (conv1d, accumulate-head,
  // maxpool); empty for the others.
  std::vector<SpikeTensor> layer_inputs;
  // Output spikes of every conv1d / maxpool layer.
  std::vector<SpikeTensor> layer_outputs;
  Potentials features;
  std::vector<double> scores;
  int predicted = -1;
};

// Runs every layer through the array, reprogramming it page by page when the
// plan spans several pages. The array is left in cim mode.
NetworkRun run_network(const NetworkIR& net, const MappingPlan& plan,
                       CimArray& array, const SpikeTensor& input,
                       const LayerRunOptions& opts);

}  // namespace cimsnn

#endif  // CIMSNN_NEURON_CORE_HPP_

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

#include "cimsnn/neuron_core.hpp"

#include <string>

#include "cimsnn/errors.hpp"
#include "cimsnn/random.hpp"

namespace cimsnn {

std::string_view to_string(ScheduleMode mode) {
  return mode == ScheduleMode::kStrideTick ? "stride-tick" : "step-by-step";
}

ScheduleMode schedule_mode_from_string(std::string_view name) {
  if (name == "stride-tick") return ScheduleMode::kStrideTick;
  if (name == "step-by-step") return ScheduleMode::kStepByStep;
  throw ConfigError("unknown schedule mode '" + std::string(name) + "'");
}

std::pair<NeuronState, SpikeRecord> neuron_step(const NeuronState& state,
                                                const MacResult& mac,
                                                const ThresholdCurrent& i_th,
                                                double noise_sigma,
                                                int timesteps,
                                                int neuron_index) {
  if (state.phase == Phase::kIntegrate || state.phase == Phase::kCompare) {
    throw PhaseError("phase violation: neuron_step entered mid-cycle");
  }
  if (timesteps < 1 || timesteps > 3) {
    throw PhaseError("phase violation: timesteps must be 1..3");
  }
  if (state.t_in_batch < 0 || state.t_in_batch >= timesteps) {
    throw PhaseError("phase violation: t_in_batch outside the batch");
  }
  NeuronState s = state;

  s.phase = Phase::kPreset;
  if (s.t_in_batch == 0 || s.last_spike) s.threshold_charge = i_th.units;

  s.phase = Phase::kIntegrate;
  s.v_mem = integrate_membrane(s.v_mem, s.last_spike, mac.net_units());

  s.phase = Phase::kCompare;
  const double noise =
      noise_sigma > 0.0 ? noise_sigma * normal_draw(s.rng_seed, s.draws) : 0.0;
  ++s.draws;
  const bool fired = spike_decision(s.v_mem, s.threshold_charge, s.sa_offset, noise);
  const SpikeRecord rec{neuron_index, s.t_in_batch, fired};

  s.phase = Phase::kHold;
  if (s.t_in_batch == timesteps - 1) {
    s.t_in_batch = 0;
    s.v_mem = 0.0;
    s.last_spike = false;
  } else {
    ++s.t_in_batch;
    s.last_spike = fired;
  }
  return {s, rec};
}

double SaNonidealities::offset_units(int site, double unit_scale) const {
  if (offset_mv.empty()) return 0.0;
  return offset_mv.at(site % offset_mv.size()) / (mv_per_unit * unit_scale);
}

double SaNonidealities::noise_units(double unit_scale) const {
  return noise_mv_rms / (mv_per_unit * unit_scale);
}

double SaNonidealities::noise_sample_mv(std::uint64_t key,
                                        std::uint64_t index) const {
  return noise_mv_rms * normal_draw(hash_key({seed, key}), index);
}

SaNonidealities sample_sa_nonidealities(int n_neurons, double offset_sigma_mv,
                                        double noise_mv_rms, double mv_per_unit,
                                        std::uint64_t seed) {
  if (!(mv_per_unit > 0)) throw ConfigError("mv_per_unit must be > 0");
  if (n_neurons < 0 || offset_sigma_mv < 0 || noise_mv_rms < 0) {
    throw ConfigError("sense-amplifier sigmas and counts must be >= 0");
  }
  SaNonidealities sa;
  sa.noise_mv_rms = noise_mv_rms;
  sa.mv_per_unit = mv_per_unit;
  sa.seed = seed;
  sa.offset_mv.assign(n_neurons, 0.0);
  if (offset_sigma_mv > 0) {
    const std::uint64_t key = hash_key({seed, 0x6f6666736574ULL});
    for (int i = 0; i < n_neurons; ++i) {
      sa.offset_mv[i] = offset_sigma_mv * normal_draw(key, i);
    }
  }
  return sa;
}

namespace {

int conv_length(const LayerSpec& l, int in_length) {
  return (in_length + 2 * l.padding - l.kernel) / l.stride + 1;
}

void check_input(const LayerSpec& layer, const LayerPlacement& placement,
                 const SpikeTensor& input) {
  if (input.channels() != layer.in_channels) {
    throw ShapeError("shape mismatch: layer expects " +
                     std::to_string(layer.in_channels) + " input channels, got " +
                     std::to_string(input.channels()));
  }
  if (input.timesteps() < 1 || input.timesteps() > 3) {
    throw ShapeError("shape mismatch: spike tensor needs 1..3 timesteps");
  }
  if (input.length() + 2 * layer.padding < layer.kernel) {
    throw ShapeError("shape mismatch: input shorter than the kernel");
  }
  if (placement.rows != layer.in_channels * layer.kernel ||
      placement.pairs != layer.out_channels) {
    throw ShapeError("shape mismatch: placement does not match the layer");
  }
}

// Absolute array rows driven by input block `p` at timestep `t`.
void active_rows(const LayerSpec& l, const LayerPlacement& placement,
                 const SpikeTensor& in, int t, int p, std::vector<int>* rows) {
  rows->clear();
  for (int k = 0; k < l.kernel; ++k) {
    const int pos = p * l.stride + k - l.padding;
    if (pos < 0 || pos >= in.length()) continue;
    for (int c = 0; c < l.in_channels; ++c) {
      if (in.at(t, c, pos)) rows->push_back(placement.row_offset + k * l.in_channels + c);
    }
  }
}

struct NeuronSetup {
  int pair = 0;
  ThresholdCurrent i_th;
  double offset = 0.0;
  double noise_sigma = 0.0;
};

std::vector<NeuronSetup> neuron_setup(const LayerPlacement& placement,
                                      const CimArray& array,
                                      const LayerRunOptions& opts) {
  std::vector<NeuronSetup> out(placement.pairs);
  const ArrayGeometry& g = array.geometry();
  for (int o = 0; o < placement.pairs; ++o) {
    NeuronSetup& n = out[o];
    n.pair = placement.pair_offset + o;
    n.i_th = array.threshold_current(n.pair, opts.celsius);
    if (opts.sa != nullptr) {
      const double scale = array.regulator(g.pair(n.pair).subbank).unit_current /
                           array.params().i_unit_target;
      n.offset = opts.sa->offset_units(g.neuron_site(n.pair), scale);
      n.noise_sigma = opts.sa->noise_units(scale);
    }
  }
  return out;
}

NeuronState initial_state(const NeuronSetup& n, const LayerRunOptions& opts,
                          int layer_index, int o, int p) {
  NeuronState s;
  s.sa_offset = n.offset;
  s.rng_seed = hash_key({opts.noise_seed, static_cast<std::uint64_t>(layer_index),
                         static_cast<std::uint64_t>(o), static_cast<std::uint64_t>(p)});
  if (opts.sa != nullptr) s.rng_seed = hash_key({s.rng_seed, opts.sa->seed});
  return s;
}

}  // namespace

SpikeTensor run_layer(const LayerSpec& layer, const LayerPlacement& placement,
                      const SpikeTensor& input, const CimArray& array,
                      const LayerRunOptions& opts, int layer_index) {
  if (layer.kind != LayerKind::kConv1d) {
    throw ShapeError("run_layer: expects a conv1d layer");
  }
  check_input(layer, placement, input);
  const int T = input.timesteps();
  const int P = conv_length(layer, input.length());
  SpikeTensor out(T, layer.out_channels, P);
  const std::vector<NeuronSetup> setup = neuron_setup(placement, array, opts);
  std::vector<int> rows;
  rows.reserve(placement.rows);

  if (opts.order == ScheduleMode::kStrideTick) {
    std::vector<std::vector<int>> rows_t(T);
    for (int p = 0; p < P; ++p) {
      for (int t = 0; t < T; ++t) active_rows(layer, placement, input, t, p, &rows_t[t]);
      for (int o = 0; o < layer.out_channels; ++o) {
        const NeuronSetup& n = setup[o];
        NeuronState s = initial_state(n, opts, layer_index, o, p);
        for (int t = 0; t < T; ++t) {
          const MacResult m = array.mac_rows(rows_t[t], n.pair, opts.celsius);
          auto [next, rec] = neuron_step(s, m, n.i_th, n.noise_sigma, T, o);
          s = next;
          out.set(t, o, p, rec.fired);
        }
      }
    }
    return out;
  }

  std::vector<NeuronState> states;
  states.reserve(static_cast<std::size_t>(layer.out_channels) * P);
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int p = 0; p < P; ++p) {
      states.push_back(initial_state(setup[o], opts, layer_index, o, p));
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < P; ++p) {
      active_rows(layer, placement, input, t, p, &rows);
      for (int o = 0; o < layer.out_channels; ++o) {
        const NeuronSetup& n = setup[o];
        NeuronState& s = states[static_cast<std::size_t>(o) * P + p];
        const MacResult m = array.mac_rows(rows, n.pair, opts.celsius);
        auto [next, rec] = neuron_step(s, m, n.i_th, n.noise_sigma, T, o);
        s = next;
        out.set(t, o, p, rec.fired);
      }
    }
  }
  return out;
}

Potentials run_accumulate_head(const LayerSpec& layer,
                               const LayerPlacement& placement,
                               const SpikeTensor& input, const CimArray& array,
                               const LayerRunOptions& opts) {
  if (layer.kind != LayerKind::kAccumulateHead) {
    throw ShapeError("run_accumulate_head: expects an accumulate-head layer");
  }
  check_input(layer, placement, input);
  const int P = conv_length(layer, input.length());
  Potentials out(layer.out_channels, P);
  std::vector<int> rows;
  for (int p = 0; p < P; ++p) {
    for (int t = 0; t < input.timesteps(); ++t) {
      active_rows(layer, placement, input, t, p, &rows);
      for (int o = 0; o < layer.out_channels; ++o) {
        out.at(o, p) += array.mac_rows(rows, placement.pair_offset + o, opts.celsius)
                            .net_units();
      }
    }
  }
  return out;
}

SpikeTensor max_pool(const SpikeTensor& input, int pool) {
  if (pool < 1) throw ShapeError("max_pool: pool must be >= 1");
  const int L = input.length() / pool;
  SpikeTensor out(input.timesteps(), input.channels(), L);
  for (int t = 0; t < input.timesteps(); ++t) {
    for (int c = 0; c < input.channels(); ++c) {
      for (int l = 0; l < L; ++l) {
        bool any = false;
        for (int j = 0; j < pool && !any; ++j) any = input.at(t, c, l * pool + j);
        out.set(t, c, l, any);
      }
    }
  }
  return out;
}

Potentials avg_pool(const Potentials& input, int pool) {
  if (pool < 1) throw ShapeError("avg_pool: pool must be >= 1");
  const int L = input.length / pool;
  Potentials out(input.channels, L);
  for (int c = 0; c < input.channels; ++c) {
    for (int l = 0; l < L; ++l) {
      double sum = 0.0;
      for (int j = 0; j < pool; ++j) sum += input.at(c, l * pool + j);
      out.at(c, l) = sum / pool;
    }
  }
  return out;
}

Potentials spike_counts(const SpikeTensor& spikes) {
  Potentials out(spikes.channels(), spikes.length());
  for (int t = 0; t < spikes.timesteps(); ++t) {
    for (int c = 0; c < spikes.channels(); ++c) {
      for (int l = 0; l < spikes.length(); ++l) out.at(c, l) += spikes.at(t, c, l);
    }
  }
  return out;
}

std::vector<double> classify(const TernaryWeights& w, const Potentials& features) {
  if (static_cast<std::size_t>(w.in) != features.v.size() || w.kernel != 1) {
    throw ShapeError("classify: feature size does not match the classifier");
  }
  std::vector<double> scores(w.out, 0.0);
  for (int o = 0; o < w.out; ++o) {
    for (int j = 0; j < w.in; ++j) scores[o] += w.at(o, j, 0) * features.v[j];
  }
  return scores;
}

int argmax(const std::vector<double>& scores) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (best < 0 || scores[i] > scores[best]) best = i;
  }
  return best;
}

NetworkRun run_network(const NetworkIR& net, const MappingPlan& plan,
                       CimArray& array, const SpikeTensor& input,
                       const LayerRunOptions& opts) {
  if (input.channels() != net.input_channels() ||
      input.length() != net.input_length() ||
      input.timesteps() != net.timesteps()) {
    throw ShapeError("shape mismatch: input spikes do not match the network input");
  }
  int loaded = -1;
  auto ensure_page = [&](int page) {
    if (loaded == page) return;
    if (plan.pages > 1 || array.mode() == ArrayMode::kDataAccess) {
      array.enter_data_access_mode();
      array.program(plan, net, page);
    }
    array.enter_cim_mode(opts.celsius);
    loaded = page;
  };

  const auto& layers = net.layers();
  NetworkRun run;
  run.layer_inputs.resize(layers.size());
  run.layer_outputs.resize(layers.size());
  SpikeTensor cur = input;
  bool have_features = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    switch (l.kind) {
      case LayerKind::kConv1d: {
        const LayerPlacement& pl = plan.for_layer(static_cast<int>(i));
        ensure_page(pl.page);
        run.layer_inputs[i] = cur;
        cur = run_layer(l, pl, cur, array, opts, static_cast<int>(i));
        run.layer_outputs[i] = cur;
        break;
      }
      case LayerKind::kMaxPool:
        run.layer_inputs[i] = cur;
        cur = max_pool(cur, l.pool);
        run.layer_outputs[i] = cur;
        break;
      case LayerKind::kAccumulateHead: {
        const LayerPlacement& pl = plan.for_layer(static_cast<int>(i));
        ensure_page(pl.page);
        run.layer_inputs[i] = cur;
        run.features = run_accumulate_head(l, pl, cur, array, opts);
        have_features = true;
        break;
      }
      case LayerKind::kAvgPool:
        if (!have_features) {
          run.features = spike_counts(cur);
          have_features = true;
        }
        run.features = avg_pool(run.features, l.pool);
        break;
      case LayerKind::kClassifier:
        if (!have_features) {
          run.features = spike_counts(cur);
          have_features = true;
        }
        run.scores = classify(net.weights_for(i), run.features);
        break;
    }
  }
  if (!have_features) run.features = spike_counts(cur);
  if (run.scores.empty()) run.scores = run.features.v;
  run.predicted = argmax(run.scores);
  return run;
}

}  // namespace cimsnn

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

#ifndef CIMSNN_SCHEDULER_HPP_
#define CIMSNN_SCHEDULER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cimsnn/model_ir.hpp"
#include "cimsnn/schedule_mode.hpp"

namespace cimsnn {

struct ScheduleConfig {
  ScheduleMode mode = ScheduleMode::kStrideTick;
  int line_buffers = 3;
  int line_buffer_width = 1024;  // bits
  int fm_read_bits = 32;         // feature-map SRAM word per read
  bool pipelined_pooling = false;
  int timesteps = 3;
  int cycles_per_mac = 1;
  int cycles_per_fm_read = 1;
  int neurons = 128;
  double clock_hz = 71e6;

  void validate() const;
};

struct ScheduleEvent {
  std::string kind;  // prologue | block | refill | pool | pool-writeback
  int layer = 0;
  int block = -1;
  int timestep = -1;
  std::int64_t start = 0;
  std::int64_t cycles = 0;
  std::int64_t unique_reads = 0;
  std::int64_t reused_reads = 0;
};

struct LayerCycles {
  int layer = 0;
  LayerKind kind = LayerKind::kConv1d;
  std::int64_t cycles = 0;
  std::int64_t unique_reads = 0;
  std::int64_t reused_reads = 0;
};

struct ScheduleReport {
  ScheduleConfig config;
  std::vector<LayerCycles> per_layer;
  std::int64_t total_cycles = 0;
  std::int64_t membrane_buffer_bits = 0;
  std::int64_t feature_buffer_bits = 0;
  std::int64_t unique_reads = 0;
  std::int64_t reused_reads = 0;
  // reused / (unique + reused) feature-map demands.
  double input_reuse_fraction = 0.0;
  double wall_time_s = 0.0;
  std::vector<ScheduleEvent> events;
};

// Step-by-step keeps every feature map for all T timesteps (input, conv and
// pooled maps, one bit-equivalent per element); stride-tick keeps only the
// neuron-local batching registers, min(neurons, widest layer) x T.
std::int64_t membrane_buffer_bits(const NetworkIR& net,
                                  const ScheduleConfig& config);

ScheduleReport simulate_schedule(const NetworkIR& net,
                                 const ScheduleConfig& config);

double input_reuse_fraction(const ScheduleConfig& config, int timesteps);

// Layer-pipelining model: each CIM layer costs one MAC slot per output
// position and neuron pass, each maxpool drains S * floor(P/S) write-back
// cycles. Pooling write-back overlaps the drain with the next convolution.
std::int64_t simulate_pipeline(const NetworkIR& net, bool pipelined,
                               int timesteps = 1, int cycles_per_mac = 1,
                               int neurons = 128);

struct LatencyRow {
  int layer = 0;
  std::int64_t step_by_step_1lb = 0;
  std::int64_t stride_tick_1lb = 0;
  std::int64_t stride_tick_3lb = 0;
};

// Per-CIM-layer cycles under the three line-buffer / batching variants.
std::vector<LatencyRow> latency_comparison(const NetworkIR& net,
                                           const ScheduleConfig& base);

}  // namespace cimsnn

#endif  // CIMSNN_SCHEDULER_HPP_

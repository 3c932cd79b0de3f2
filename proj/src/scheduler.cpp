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

#include "cimsnn/scheduler.hpp"

#include <algorithm>

#include "cimsnn/errors.hpp"

namespace cimsnn {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

class Timeline {
 public:
  Timeline(ScheduleReport* report, LayerCycles* layer)
      : report_(report), layer_(layer) {}

  void add(std::string kind, int block, int timestep, std::int64_t cycles,
           std::int64_t unique, std::int64_t reused) {
    ScheduleEvent e;
    e.kind = std::move(kind);
    e.layer = layer_->layer;
    e.block = block;
    e.timestep = timestep;
    e.start = report_->total_cycles;
    e.cycles = cycles;
    e.unique_reads = unique;
    e.reused_reads = reused;
    report_->total_cycles += cycles;
    report_->unique_reads += unique;
    report_->reused_reads += reused;
    layer_->cycles += cycles;
    layer_->unique_reads += unique;
    layer_->reused_reads += reused;
    report_->events.push_back(std::move(e));
  }

 private:
  ScheduleReport* report_;
  LayerCycles* layer_;
};

void schedule_cim_layer(const LayerSpec& l, const LayerShape& shape,
                        const ScheduleConfig& cfg, Timeline* tl) {
  const int T = cfg.timesteps;
  const std::int64_t P = shape.out_length;
  const std::int64_t reads_per_col = ceil_div(l.in_channels, cfg.fm_read_bits);
  const std::int64_t col_cycles = reads_per_col * cfg.cycles_per_fm_read;
  const std::int64_t pro_cols = std::max(l.kernel - l.stride, 0);
  const std::int64_t fetch_cols = l.stride;
  const std::int64_t mac = ceil_div(l.out_channels, cfg.neurons) * cfg.cycles_per_mac;

  if (cfg.mode == ScheduleMode::kStepByStep) {
    for (int t = 0; t < T; ++t) {
      tl->add("prologue", -1, t, pro_cols * col_cycles, pro_cols * reads_per_col, 0);
      for (std::int64_t b = 0; b < P; ++b) {
        tl->add("block", static_cast<int>(b), t,
                std::max(fetch_cols * col_cycles, mac), fetch_cols * reads_per_col, 0);
      }
    }
    return;
  }
  if (cfg.line_buffers == 1) {
    // The single buffer is rewritten for every (block, timestep).
    const std::int64_t refill_reads =
        std::max(ceil_div(cfg.line_buffer_width, cfg.fm_read_bits),
                 ceil_div(static_cast<std::int64_t>(l.kernel) * l.in_channels,
                          cfg.fm_read_bits));
    const std::int64_t refill = refill_reads * cfg.cycles_per_fm_read;
    for (std::int64_t b = 0; b < P; ++b) {
      for (int t = 0; t < T; ++t) {
        tl->add("refill", static_cast<int>(b), t, std::max(refill, mac), refill_reads, 0);
      }
    }
    return;
  }
  // One buffer per timestep: each column position is read from all T
  // timestep banks in one transaction and the T MACs follow back to back.
  const std::int64_t shared = T - 1;
  tl->add("prologue", -1, -1, pro_cols * col_cycles, pro_cols * reads_per_col,
          shared * pro_cols * reads_per_col);
  for (std::int64_t b = 0; b < P; ++b) {
    tl->add("block", static_cast<int>(b), -1,
            std::max(fetch_cols * col_cycles, T * mac), fetch_cols * reads_per_col,
            shared * fetch_cols * reads_per_col);
  }
}

std::int64_t pool_drain_cycles(int pool, int in_length, int channels,
                               int timesteps, int neurons) {
  const std::int64_t passes = ceil_div(channels, neurons);
  return static_cast<std::int64_t>(timesteps) * pool * (in_length / pool) * passes;
}

}  // namespace

void ScheduleConfig::validate() const {
  if (line_buffers != 1 && line_buffers != 3) {
    throw ConfigError("schedule.line_buffers must be 1 or 3");
  }
  if (timesteps < 1 || timesteps > 3) {
    throw ConfigError("schedule.timesteps out of range (1..3)");
  }
  if (line_buffer_width < 1 || fm_read_bits < 1 || cycles_per_mac < 1 ||
      cycles_per_fm_read < 1 || neurons < 1) {
    throw ConfigError("schedule widths and cycle costs must be >= 1");
  }
  if (!(clock_hz > 0)) throw ConfigError("schedule.clock_hz must be > 0");
}

std::int64_t membrane_buffer_bits(const NetworkIR& net,
                                  const ScheduleConfig& config) {
  const std::int64_t T = config.timesteps;
  if (config.mode == ScheduleMode::kStrideTick) {
    int widest = 0;
    for (std::size_t i : net.cim_layers()) {
      widest = std::max(widest, net.layers()[i].out_channels);
    }
    return static_cast<std::int64_t>(std::min(widest, config.neurons)) * T;
  }
  std::int64_t elements =
      static_cast<std::int64_t>(net.input_channels()) * net.input_length();
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    const LayerShape& s = net.shapes()[i];
    if (l.on_cim() || l.kind == LayerKind::kMaxPool) {
      elements += static_cast<std::int64_t>(s.out_channels) * s.out_length;
    }
  }
  return elements * T;
}

double input_reuse_fraction(const ScheduleConfig& config, int timesteps) {
  if (timesteps < 1 || timesteps > 3) {
    throw ConfigError("input_reuse_fraction: timesteps out of range (1..3)");
  }
  if (config.mode != ScheduleMode::kStrideTick || config.line_buffers != 3) return 0.0;
  return static_cast<double>(timesteps - 1) / timesteps;
}

ScheduleReport simulate_schedule(const NetworkIR& net,
                                 const ScheduleConfig& config) {
  config.validate();
  ScheduleReport r;
  r.config = config;
  r.membrane_buffer_bits = membrane_buffer_bits(net, config);
  r.feature_buffer_bits =
      static_cast<std::int64_t>(config.line_buffers) * config.line_buffer_width;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    const LayerShape& s = net.shapes()[i];
    LayerCycles lc;
    lc.layer = static_cast<int>(i);
    lc.kind = l.kind;
    Timeline tl(&r, &lc);
    if (l.on_cim()) {
      schedule_cim_layer(l, s, config, &tl);
    } else if (l.kind == LayerKind::kMaxPool) {
      const std::int64_t drain = pool_drain_cycles(
          l.pool, s.in_length, s.in_channels, config.timesteps, config.neurons);
      if (config.pipelined_pooling) {
        tl.add("pool-writeback", -1, -1, 0, 0, 0);
      } else {
        tl.add("pool", -1, -1, drain, 0, 0);
      }
    }
    r.per_layer.push_back(lc);
  }
  const std::int64_t demands = r.unique_reads + r.reused_reads;
  r.input_reuse_fraction =
      demands == 0 ? 0.0 : static_cast<double>(r.reused_reads) / demands;
  r.wall_time_s = static_cast<double>(r.total_cycles) / config.clock_hz;
  return r;
}

std::int64_t simulate_pipeline(const NetworkIR& net, bool pipelined,
                               int timesteps, int cycles_per_mac, int neurons) {
  if (timesteps < 1 || timesteps > 3 || cycles_per_mac < 1 || neurons < 1) {
    throw ConfigError("simulate_pipeline: invalid timing parameters");
  }
  std::int64_t conv = 0;
  std::int64_t pool = 0;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    const LayerShape& s = net.shapes()[i];
    if (l.on_cim()) {
      conv += static_cast<std::int64_t>(timesteps) * s.out_length *
              ceil_div(l.out_channels, neurons) * cycles_per_mac;
    } else if (l.kind == LayerKind::kMaxPool) {
      pool += pool_drain_cycles(l.pool, s.in_length, s.in_channels, timesteps, neurons);
    }
  }
  return pipelined ? conv : conv + pool;
}

std::vector<LatencyRow> latency_comparison(const NetworkIR& net,
                                           const ScheduleConfig& base) {
  ScheduleConfig sbs = base;
  sbs.mode = ScheduleMode::kStepByStep;
  sbs.line_buffers = 1;
  ScheduleConfig st1 = base;
  st1.mode = ScheduleMode::kStrideTick;
  st1.line_buffers = 1;
  ScheduleConfig st3 = base;
  st3.mode = ScheduleMode::kStrideTick;
  st3.line_buffers = 3;
  const ScheduleReport a = simulate_schedule(net, sbs);
  const ScheduleReport b = simulate_schedule(net, st1);
  const ScheduleReport c = simulate_schedule(net, st3);
  std::vector<LatencyRow> rows;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    if (!net.layers()[i].on_cim()) continue;
    rows.push_back({static_cast<int>(i), a.per_layer[i].cycles, b.per_layer[i].cycles,
                    c.per_layer[i].cycles});
  }
  return rows;
}

}  // namespace cimsnn

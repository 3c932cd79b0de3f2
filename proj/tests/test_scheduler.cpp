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

#include <random>
#include <vector>

#include "cimsnn/config.hpp"
#include "cimsnn/errors.hpp"
#include "cimsnn/keyword_ref.hpp"
#include "cimsnn/scheduler.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace cimsnn;

namespace {

ScheduleConfig make(ScheduleMode mode, int buffers, int T = 3) {
  ScheduleConfig c;
  c.mode = mode;
  c.line_buffers = buffers;
  c.timesteps = T;
  return c;
}

}  // namespace

TEST_CASE("first-layer latency on keyword_ref") {
  const NetworkIR net = make_keyword_ref(3);
  const std::vector<LatencyRow> rows = latency_comparison(net, ScheduleConfig());
  REQUIRE_FALSE(rows.empty());
  CHECK(rows[0].layer == 0);
  CHECK(rows[0].step_by_step_1lb == 12000);
  CHECK(rows[0].stride_tick_1lb == 380928);
  CHECK(rows[0].stride_tick_3lb == 11936);
}

TEST_CASE("pipelined pooling halves the latency") {
  const NetworkIR net = make_keyword_ref(1);
  const std::int64_t base = simulate_pipeline(net, false);
  const std::int64_t piped = simulate_pipeline(net, true);
  CHECK(base == 9873);
  CHECK(piped == 4945);
  CHECK(1.0 - static_cast<double>(piped) / base == doctest::Approx(0.4992).epsilon(0.01));
  ScheduleConfig c = make(ScheduleMode::kStrideTick, 3, 1);
  const std::int64_t a = simulate_schedule(net, c).total_cycles;
  c.pipelined_pooling = true;
  CHECK(simulate_schedule(net, c).total_cycles < a);
}

TEST_CASE("membrane buffer shrinks from the whole network to one neuron row") {
  const NetworkIR net = make_keyword_ref(3);
  const auto sbs = membrane_buffer_bits(net, make(ScheduleMode::kStepByStep, 1));
  const auto st = membrane_buffer_bits(net, make(ScheduleMode::kStrideTick, 3));
  CHECK(sbs == 1488 * 1024);
  CHECK(st == 384);
  CHECK(st / 1024.0 == doctest::Approx(0.375));
}

TEST_CASE("input reuse with three line buffers") {
  const NetworkIR net = make_keyword_ref(3);
  CHECK(input_reuse_fraction(make(ScheduleMode::kStrideTick, 3), 3) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(simulate_schedule(net, make(ScheduleMode::kStrideTick, 3)).input_reuse_fraction ==
        doctest::Approx(2.0 / 3.0));
  CHECK(simulate_schedule(net, make(ScheduleMode::kStepByStep, 1)).input_reuse_fraction == 0.0);
  CHECK(input_reuse_fraction(make(ScheduleMode::kStrideTick, 3), 1) == 0.0);
  CHECK_THROWS_AS(input_reuse_fraction(ScheduleConfig(), 4), ConfigError);
}

TEST_CASE("trace events tile the timeline and conserve cycles") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const NetworkIR net = testing::random_small_net(rng);
    for (ScheduleMode mode : {ScheduleMode::kStrideTick, ScheduleMode::kStepByStep}) {
      for (int lb : {1, 3}) {
        ScheduleConfig c = make(mode, lb, net.timesteps());
        c.pipelined_pooling = trial % 2;
        const ScheduleReport r = simulate_schedule(net, c);
        std::int64_t t = 0, unique = 0, reused = 0;
        for (const ScheduleEvent& e : r.events) {
          CHECK(e.start == t);
          CHECK(e.cycles >= 0);
          t += e.cycles;
          unique += e.unique_reads;
          reused += e.reused_reads;
        }
        CHECK(t == r.total_cycles);
        CHECK(unique == r.unique_reads);
        CHECK(reused == r.reused_reads);
        std::int64_t per_layer = 0;
        for (const LayerCycles& l : r.per_layer) per_layer += l.cycles;
        CHECK(per_layer == r.total_cycles);
      }
    }
  }
}

TEST_CASE("event order follows the schedule mode") {
  const NetworkIR net = make_keyword_ref(3);
  const ScheduleReport sbs = simulate_schedule(net, make(ScheduleMode::kStepByStep, 1));
  int last_t = -1, last_b = -1;
  for (const ScheduleEvent& e : sbs.events) {
    if (e.layer != 0 || e.kind != "block") continue;
    // Timesteps outermost, blocks restart each timestep.
    if (e.timestep == last_t) CHECK(e.block == last_b + 1);
    else CHECK(e.timestep == last_t + 1);
    last_t = e.timestep;
    last_b = e.block;
  }
  CHECK(last_t == 2);
  const ScheduleReport st1 = simulate_schedule(net, make(ScheduleMode::kStrideTick, 1));
  last_t = -1;
  last_b = 0;
  for (const ScheduleEvent& e : st1.events) {
    if (e.layer != 0) continue;
    // Blocks outermost, every timestep of a block before the next block.
    CHECK(e.block >= last_b);
    if (e.block == last_b) CHECK(e.timestep == last_t + 1);
    else CHECK(e.timestep == 0);
    last_b = e.block;
    last_t = e.timestep;
  }
  int layer0 = 0;
  for (const ScheduleEvent& e : simulate_schedule(net, make(ScheduleMode::kStrideTick, 3)).events) {
    if (e.layer == 0 && e.kind == "block") {
      CHECK(e.block == layer0++);
      CHECK(e.timestep == -1);
    }
  }
  CHECK(layer0 == net.shapes()[0].out_length);
}

TEST_CASE("an empty model schedules in zero cycles") {
  const NetworkIR net =
      parse_network_config(R"({"timesteps": 2, "input_length": 8, "layers": []})", ".");
  const ScheduleReport r = simulate_schedule(net, make(ScheduleMode::kStrideTick, 3, 2));
  CHECK(r.total_cycles == 0);
  CHECK(r.events.empty());
  CHECK(r.input_reuse_fraction == 0.0);
  CHECK(simulate_pipeline(net, true) == 0);
}

TEST_CASE("cycle counts scale with timesteps") {
  const NetworkIR net = make_keyword_ref(3);
  for (ScheduleMode mode : {ScheduleMode::kStrideTick, ScheduleMode::kStepByStep}) {
    const auto one = simulate_schedule(net, make(mode, 1, 1)).total_cycles;
    const auto three = simulate_schedule(net, make(mode, 1, 3)).total_cycles;
    CHECK(three > one);
  }
  CHECK(simulate_pipeline(net, true, 3) == 3 * simulate_pipeline(net, true, 1));
}

TEST_CASE("schedule config validation") {
  ScheduleConfig c;
  c.line_buffers = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ScheduleConfig();
  c.timesteps = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ScheduleConfig();
  c.fm_read_bits = 0;
  CHECK_THROWS_AS(simulate_schedule(make_keyword_ref(3), c), ConfigError);
  CHECK_THROWS_AS(simulate_pipeline(make_keyword_ref(3), true, 4), ConfigError);
}

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

#include <cmath>
#include <vector>

#include "cimsnn/config.hpp"
#include "cimsnn/errors.hpp"
#include "cimsnn/scheduler.hpp"
#include "cimsnn/trainer.hpp"
#include "doctest.h"

using namespace cimsnn;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.task.p_active = 0.4;
  c.task.p_background = 0.1;
  c.net.hidden = {8};
  c.train_samples = 128;
  c.test_samples = 64;
  c.pretrain_epochs = 8;
  c.quantize_epochs = 4;
  c.prune_epochs = 3;
  c.finetune_epochs = 2;
  c.n_mc = 2;
  c.variation.mv_per_unit = 2.5;
  return c;
}

}  // namespace

TEST_CASE("surrogate gradient is the derivative of the relaxed spike") {
  for (double slope : {0.5, 1.0, 3.0}) {
    for (double v = -4; v <= 12; v += 0.37) {
      const double h = 1e-6;
      const double fd =
          (relaxed_spike(v + h, 5.0, slope) - relaxed_spike(v - h, 5.0, slope)) / (2 * h);
      CHECK(surrogate_spike_grad(v, 5.0, slope) == doctest::Approx(fd).epsilon(1e-5));
      CHECK(relaxed_spike(v, 5.0, slope) >= 0.0);
      CHECK(relaxed_spike(v, 5.0, slope) <= 1.0);
    }
    CHECK(relaxed_spike(5.0, 5.0, slope) == doctest::Approx(0.5));
  }
}

TEST_CASE("backprop agrees with central differences") {
  const TrainConfig cfg = small_config();
  const auto data = make_toy_dataset(cfg.task, 6, 77);
  for (int T : {1, 2, 3}) {
    SnnModel model(cfg.net, T, 5);
    ForwardOptions o;
    const GradientCheck gc = gradient_check(model, data, o, 1e-5, 1e-4);
    CHECK(gc.parameters > 0);
    CHECK(gc.pass_fraction() >= 0.95);
  }
}

TEST_CASE("training stages run in order") {
  const TrainConfig cfg = small_config();
  SnnModel m(cfg.net, 3, 1);
  CHECK(m.stage() == TrainStage::kInitialized);
  CHECK_THROWS_AS(m.advance(TrainStage::kPruned), PhaseError);
  CHECK_THROWS_AS(m.advance(TrainStage::kFinetuned), PhaseError);
  const auto train = make_toy_dataset(cfg.task, 32, 2);
  const auto test = make_toy_dataset(cfg.task, 16, 3);
  CHECK_THROWS_AS(variation_finetune(m, cfg.variation, 1, train, test, cfg), PhaseError);
  m.advance(TrainStage::kPretrained);
  m.advance(TrainStage::kQuantized);
  CHECK_THROWS_AS(m.advance(TrainStage::kPretrained), PhaseError);
  m.advance(TrainStage::kFinetuned);
  CHECK(m.stage() == TrainStage::kFinetuned);
}

TEST_CASE("the hardware-view forward matches the array at zero variation") {
  const TrainConfig cfg = small_config();
  SnnModel model(cfg.net, 3, 4);
  const auto data = make_toy_dataset(cfg.task, 64, 8);
  model.advance(TrainStage::kPretrained);
  model.advance(TrainStage::kQuantized);
  ChipSample chip = sample_chip(model, VariationProfile::none(), cfg.geometry, 1);
  const HardwareInstance hw = hardware_view(model, chip);
  for (int T : {1, 2, 3}) {
    model.set_timesteps(T);
    for (const auto& s : data) {
      ForwardOptions o;
      o.weights = WeightMode::kTernary;
      o.hardware = &hw;
      const SpikeTensor x = truncate_timesteps(s.x, T);
      const ForwardResult f = loss_and_grad(model, x, s.label, o, nullptr);
      const NetworkIR ir = model.to_ir(cfg.ternary_threshold);
      const NetworkRun run = run_network(ir, chip.plan, chip.array, x, LayerRunOptions());
      CHECK(f.predicted == run.predicted);
      for (std::size_t i = 0; i < f.spikes.size(); ++i) {
        if (!f.spikes[i].empty()) CHECK(f.spikes[i] == run.layer_outputs[i]);
      }
    }
  }
}

TEST_CASE("a zero-variation profile loses nothing") {
  TrainConfig cfg = small_config();
  cfg.variation = VariationProfile::none();
  const TrainReport r = run_training(cfg);
  CHECK(r.triple.degraded_acc == r.triple.ideal_acc);
}

TEST_CASE("training is deterministic") {
  const TrainConfig cfg = small_config();
  SnnModel a(cfg.net, 3, 1), b(cfg.net, 3, 1);
  const TrainReport ra = run_training(cfg, &a);
  const TrainReport rb = run_training(cfg, &b);
  CHECK(ra.triple.ideal_acc == rb.triple.ideal_acc);
  CHECK(ra.triple.degraded_acc == rb.triple.degraded_acc);
  CHECK(ra.triple.recovered_acc == rb.triple.recovered_acc);
  CHECK(a.latent() == b.latent());
  CHECK(ra.stage_accuracy == rb.stage_accuracy);
}

TEST_CASE("pruning to one timestep keeps accuracy and saves cycles") {
  TrainConfig cfg = small_config();
  cfg.net.hidden = {16};
  cfg.train_samples = 256;
  cfg.test_samples = 256;
  cfg.pretrain_epochs = 15;
  cfg.quantize_epochs = 6;
  cfg.prune_epochs = 6;
  const auto train = make_toy_dataset(cfg.task, cfg.train_samples, 101);
  const auto test = make_toy_dataset(cfg.task, cfg.test_samples, 102);
  SnnModel model(cfg.net, 3, cfg.seed);
  pretrain(model, train, cfg);
  progressive_quantize(model, train, cfg);
  const double acc3 = evaluate_ideal(model, test, cfg);
  const SnnModel pruned = progressive_timestep_prune(model, 3, 1, train, cfg);
  const double acc1 = evaluate_ideal(pruned, test, cfg);
  CHECK(pruned.timesteps() == 1);
  CHECK(pruned.stage() == TrainStage::kPruned);
  CHECK(acc3 > 0.5);
  CHECK(acc1 >= acc3 - 0.05);
  ScheduleConfig s3;
  s3.timesteps = 3;
  ScheduleConfig s1 = s3;
  s1.timesteps = 1;
  CHECK(simulate_schedule(pruned.to_ir(), s1).total_cycles <
        simulate_schedule(model.to_ir(), s3).total_cycles);
}

TEST_CASE("train config parsing") {
  const TrainConfig c = parse_train_config(
      R"({"train": {"seed": 4, "variation": {"mV_per_unit": 2.5}, "n_mc": 3}})");
  CHECK(c.seed == 4);
  CHECK(c.n_mc == 3);
  CHECK(c.variation.mv_per_unit == 2.5);
  CHECK(parse_train_config(R"({"seed": 9})").seed == 9);
  CHECK_THROWS_AS(parse_train_config(R"({"bogus": 1})"), ConfigError);
  TrainConfig bad;
  bad.target_timesteps = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

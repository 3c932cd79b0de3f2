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

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cimsnn/errors.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace {

using cimsnn::cli::CommonOptions;

void add_common(CLI::App* app, CommonOptions* c, bool need_config) {
  auto* opt = app->add_option("-c,--config", c->config, "JSON config file");
  if (need_config) opt->required();
  app->add_option("-o,--out", c->out,
                  "output directory (default: $CIMSNN_OUT_DIR or ./cimsnn_out)");
  app->add_option("--seed", c->seed, "base seed");
}

int report(const char* kind, const std::string& what, int code) {
  std::fprintf(stderr, "cimsnn: %s: %s\n", kind, what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = cimsnn::cli;
  CLI::App app{"Ternary SNN compute-in-memory macro simulator"};
  app.require_subcommand(1);

  cli::InferOptions infer;
  cli::ScheduleOptions schedule;
  cli::TrainOptions train;
  cli::DeviceSweepOptions sweep;
  cli::MonteCarloOptions mc;
  cli::ExportOptions exp;

  auto* a = app.add_subcommand("infer", "run inference through the macro model");
  add_common(a, &infer.common, true);
  a->add_option("--temp", infer.celsius, "die temperature in C");
  a->add_option("--temp-sweep", infer.temp_sweep, "start:stop:step in C");
  a->add_option("--samples", infer.samples, "random input samples");
  a->add_option("--density", infer.density, "input spike density");
  a->add_flag("--ideal", infer.ideal, "no mismatch, leakage or comparator error");
  a->add_option("--mode", infer.mode, "step-by-step or stride-tick");
  a->add_flag("--dump-spikes", infer.dump_spikes, "write spikes.csv");
  a->add_flag("--trace", infer.trace, "write the schedule event timeline");
  a->add_flag("--pipelined-pooling", infer.pipelined_pooling);
  a->add_flag("--energy-json", infer.energy_json, "write energy.json");
  a->add_flag("--svg", infer.svg, "write temperature.svg");

  auto* s = app.add_subcommand("schedule", "cycle-level schedule report");
  add_common(s, &schedule.common, true);
  s->add_option("--mode", schedule.mode, "step-by-step or stride-tick");
  s->add_option("--line-buffers", schedule.line_buffers);
  s->add_flag("--pipelined-pooling", schedule.pipelined_pooling);
  s->add_flag("--trace", schedule.trace, "write the schedule event timeline");
  s->add_flag("--svg", schedule.svg, "write latency.svg");

  auto* t = app.add_subcommand("train", "variation-aware training on the toy task");
  add_common(t, &train.common, true);
  t->add_flag("--zero-variation", train.zero_variation, "evaluate with an ideal profile");

  auto* d = app.add_subcommand("device-sweep", "regulator and leakage temperature sweep");
  add_common(d, &sweep.common, false);
  d->add_option("--temp-sweep", sweep.temp_sweep, "start:stop:step in C");
  d->add_option("--seeds", sweep.seeds, "mismatch draws");
  d->add_flag("--svg", sweep.svg, "write temperature.svg");

  auto* m = app.add_subcommand("montecarlo", "inference across sampled chips");
  add_common(m, &mc.common, true);
  m->add_option("--instances", mc.instances);
  m->add_option("--samples", mc.samples);
  m->add_option("--density", mc.density);
  m->add_option("--temp", mc.celsius);
  m->add_option("--sigma", mc.sigma, "override device.sigma_mismatch");
  m->add_option("--threads", mc.threads, "0 = all cores");

  auto* e = app.add_subcommand("export-keyword-ref", "write the keyword_ref network");
  add_common(e, &exp.common, false);
  e->add_option("--nonzero", exp.nonzero, "fraction of nonzero weights");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }
  for (CommonOptions* c : {&infer.common, &schedule.common, &train.common, &sweep.common,
                           &mc.common, &exp.common}) {
    c->argv = args;
  }
  train.seed_given = t->count("--seed") > 0;

  try {
    if (*a) cli::cmd_infer(infer);
    if (*s) cli::cmd_schedule(schedule);
    if (*t) cli::cmd_train(train);
    if (*d) cli::cmd_device_sweep(sweep);
    if (*m) cli::cmd_montecarlo(mc);
    if (*e) cli::cmd_export_keyword_ref(exp);
  } catch (const cimsnn::Error& ex) {
    return report(ex.exit_code() == 2 ? "config/io error" : "simulation error", ex.what(),
                  ex.exit_code());
  } catch (const nlohmann::json::exception& ex) {
    return report("config/io error", ex.what(), 2);
  } catch (const std::filesystem::filesystem_error& ex) {
    return report("config/io error", ex.what(), 2);
  } catch (const std::exception& ex) {
    return report("simulation error", ex.what(), 1);
  }
  return 0;
}

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

// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracle.hpp"
#include "cimsnn/cim_array.hpp"
#include "cimsnn/config.hpp"
#include "cimsnn/energy.hpp"
#include "cimsnn/keyword_ref.hpp"
#include "cimsnn/neuron_core.hpp"
#include "cimsnn/scheduler.hpp"
#include "cimsnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace cimsnn;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const ArrayGeometry geo(512, 640, 64, 8, 10);
  DeviceParams p;
  p.sigma_mismatch = 0.0;
  p.leak_fraction = 0.0;
  CimArray array(geo, p, 1);
  std::mt19937_64 rng(2026);
  int mismatched = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const NetworkIR net = testing::random_small_net(rng);
    const MappingPlan plan = validate_cim_mappability(net, geo);
    array.enter_data_access_mode();
    const SpikeTensor in = testing::random_spikes(rng, net.timesteps(), net.input_channels(),
                                                  net.input_length(), 0.4);
    LayerRunOptions opts;
    opts.celsius = -20.0 + 10.0 * (i % 13);
    opts.order = i % 2 ? ScheduleMode::kStepByStep : ScheduleMode::kStrideTick;
    const NetworkRun run = run_network(net, plan, array, in, opts);
    const testing::OracleRun want = testing::oracle_forward(net, in);
    bool same = run.features.v == want.features && run.predicted == want.predicted;
    std::size_t k = 0;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      const LayerKind kind = net.layers()[l].kind;
      if (kind != LayerKind::kConv1d && kind != LayerKind::kMaxPool) continue;
      same = same && testing::to_raster(run.layer_outputs[l]) == want.spikes[k++];
    }
    if (!same) ++mismatched;
  }
  const double s = seconds_since(t0);
  return {mismatched == 0 && s < 60.0,
          fmt("%d/%d networks bit-exact, %.1f s", n - mismatched, n, s)};
}

Outcome regulation() {
  const auto t0 = Clock::now();
  const DeviceParams p;
  std::vector<double> temps;
  for (int t = -20; t <= 100; t += 10) temps.push_back(t);
  const auto pts = regulation_sweep(ArrayGeometry(), p, temps, 100, 1);
  double worst = 0.0, fmin = 1e300, fmax = 0.0, umin = 1e300, umax = 0.0;
  for (const RegulationPoint& pt : pts) {
    worst = std::max(worst, std::abs(pt.monitor_current / p.i_unit_target - 1.0));
    worst = std::max(worst, std::abs(pt.unit_current / p.i_unit_target - 1.0));
    umin = std::min(umin, pt.monitor_current);
    umax = std::max(umax, pt.monitor_current);
    fmin = std::min(fmin, pt.fixed_supply_current);
    fmax = std::max(fmax, pt.fixed_supply_current);
  }
  const double ratio = fmax / fmin;
  const double s = seconds_since(t0);
  return {pts.size() == 13 && worst <= 0.01 && ratio >= 5.0 && s < 60.0,
          fmt("%zu temps x 100 seeds, max deviation from 200 nA %.3f%%, regulated spread %.4fx, "
              "fixed-supply ratio %.1fx, %.2f s",
              pts.size(), worst * 100, umax / umin, ratio, s)};
}

Outcome scheduler_figures() {
  const NetworkIR kw3 = make_keyword_ref(3);
  const NetworkIR kw1 = make_keyword_ref(1);
  const auto rows = latency_comparison(kw3, ScheduleConfig());
  const LatencyRow& r = rows.at(0);
  const std::int64_t base = simulate_pipeline(kw1, false);
  const std::int64_t piped = simulate_pipeline(kw1, true);
  const double saving = 100.0 * (1.0 - static_cast<double>(piped) / base);
  ScheduleConfig sbs;
  sbs.mode = ScheduleMode::kStepByStep;
  sbs.line_buffers = 1;
  ScheduleConfig st;
  const double sbs_kb = membrane_buffer_bits(kw3, sbs) / 1024.0;
  const double st_kb = membrane_buffer_bits(kw3, st) / 1024.0;
  const double reuse = simulate_schedule(kw3, st).input_reuse_fraction;
  const bool ok = r.step_by_step_1lb == 12000 && r.stride_tick_1lb == 380928 &&
                  r.stride_tick_3lb == 11936 && base == 9873 && piped == 4945 &&
                  std::abs(saving - 49.92) <= 0.5 && sbs_kb == 1488.0 && st_kb == 0.375 &&
                  std::abs(reuse - 2.0 / 3.0) < 1e-12;
  return {ok, fmt("first layer %lld/%lld/%lld cycles, pipeline %lld->%lld (%.2f%%), "
                  "buffer %.0f Kb->%.3f Kb, reuse %.4f",
                  static_cast<long long>(r.step_by_step_1lb),
                  static_cast<long long>(r.stride_tick_1lb),
                  static_cast<long long>(r.stride_tick_3lb), static_cast<long long>(base),
                  static_cast<long long>(piped), saving, sbs_kb, st_kb, reuse)};
}

Outcome variation_recovery() {
  const auto t0 = Clock::now();
  TrainConfig cfg =
      parse_train_config(slurp(fs::path(CIMSNN_SOURCE_DIR) / "configs" / "toy_train.json"));
  double ideal = 0, degraded = 0, recovered = 0;
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    cfg.seed = s;
    const TrainReport r = run_training(cfg);
    ideal += r.triple.ideal_acc / seeds;
    degraded += r.triple.degraded_acc / seeds;
    recovered += r.triple.recovered_acc / seeds;
  }
  const double gap = ideal - degraded;
  const double need = ideal - 0.5 * gap;
  const double s = seconds_since(t0);
  return {degraded < ideal - 0.10 && recovered >= need && s < 600.0,
          fmt("5-seed mean ideal %.3f, degraded %.3f, recovered %.3f (need >= %.3f), %.0f s",
              ideal, degraded, recovered, need, s)};
}

Outcome sa_statistics() {
  const int n = 100000;
  const SaNonidealities sa = sample_sa_nonidealities(n, 7.28, 1.0, kDefaultMvPerUnit, 2026);
  double sum = 0, sq = 0, nsq = 0;
  for (double v : sa.offset_mv) {
    sum += v;
    sq += v * v;
  }
  for (int i = 0; i < n; ++i) {
    const double v = sa.noise_sample_mv(i % 128, i / 128);
    nsq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double rms = std::sqrt(nsq / n);
  return {std::abs(sd / 7.28 - 1) <= 0.02 && std::abs(rms - 1.0) <= 0.02,
          fmt("offset sigma %.3f mV, noise rms %.4f mV over 1e5 draws", sd, rms)};
}

Outcome energy() {
  const double frac = 100.0 * threshold_generator_power_fraction(EnergyParams());
  EnergyParams dyn;
  dyn.include_static = false;
  const double pj = summarize_energy(1, 0, dyn).pj_per_sop;
  std::mt19937_64 rng(7);
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    const NetworkIR net = testing::random_small_net(rng);
    const SpikeTensor in = testing::random_spikes(rng, net.timesteps(), net.input_channels(),
                                                  net.input_length(), 0.3);
    const auto inputs = testing::layer_inputs(net, in);
    if (count_sops(net, inputs) == testing::brute_sops(net, inputs)) ++agree;
  }
  return {std::abs(frac - 0.93) < 0.005 && std::abs(pj - 0.647) < 1e-9 && agree == 100,
          fmt("threshold generators %.2f%% of chip power, %.3f pJ/SOP, SOP count exact on %d/100 "
              "traces",
              frac, pj, agree)};
}

Outcome gradients() {
  TrainConfig cfg;
  cfg.task.p_active = 0.4;
  cfg.task.p_background = 0.1;
  const auto data = make_toy_dataset(cfg.task, 8, 11);
  int params = 0, passed = 0;
  double worst = 0;
  for (int T : {1, 3}) {
    const SnnModel model(cfg.net, T, 3);
    const GradientCheck gc = gradient_check(model, data, ForwardOptions(), 1e-5, 1e-4);
    params += gc.parameters;
    passed += gc.passed;
    worst = std::max(worst, gc.worst_relative_error);
  }
  const double f = static_cast<double>(passed) / params;
  return {f >= 0.95, fmt("%d/%d parameters within 1e-4 relative error (%.2f%%), worst %.2e",
                         passed, params, 100 * f, worst)};
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + std::string(CIMSNN_BIN) + "\" " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  const fs::path root =
      fs::temp_directory_path() / ("cimsnn_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path src = CIMSNN_SOURCE_DIR;
  const std::string kw = "\"" + (src / "configs" / "keyword_ref" / "keyword_ref.json").string() + "\"";
  const std::string toy = "\"" + (src / "configs" / "toy_train.json").string() + "\"";
  int failures = 0, compared = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    failures += run_cli("infer -c " + kw + " --samples 2 --energy-json --dump-spikes -o \"" +
                        (d / "infer").string() + "\"") != 0;
    failures += run_cli("train -c " + toy + " -o \"" + (d / "train").string() + "\"") != 0;
  }
  const std::vector<std::string> files = {
      "infer/results.csv",      "infer/predictions.csv",   "infer/spikes.csv",
      "infer/energy.json",      "infer/schedule_report.json", "train/results.csv",
      "train/train_report.json", "train/model.json",        "train/weights.bin"};
  int differ = 0;
  for (const std::string& f : files) {
    const std::string a = slurp(root / "a" / f);
    const std::string b = slurp(root / "b" / f);
    ++compared;
    if (a.empty() || a != b) ++differ;
  }
  fs::remove_all(root);
  return {failures == 0 && differ == 0,
          fmt("%d/%d report files byte-identical across two CLI runs", compared - differ,
              compared)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"oracle-equivalence", oracle_equivalence},
      {"temperature-regulation", regulation},
      {"scheduler-figures", scheduler_figures},
      {"variation-recovery", variation_recovery},
      {"sa-statistics", sa_statistics},
      {"energy", energy},
      {"gradient-check", gradients},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%zu] %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "cimsnn/cim_array.hpp"
#include "cimsnn/config.hpp"
#include "cimsnn/energy.hpp"
#include "cimsnn/errors.hpp"
#include "cimsnn/keyword_ref.hpp"
#include "cimsnn/neuron_core.hpp"
#include "cimsnn/random.hpp"
#include "cimsnn/reference.hpp"
#include "cimsnn/scheduler.hpp"
#include "cimsnn/trainer.hpp"
#include "json.hpp"
#include "output_dir.hpp"
#include "svg.hpp"

namespace cimsnn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kInputStream = 0x696e707574ULL;
constexpr std::uint64_t kChipStream = 0x63686970ULL;
constexpr std::uint64_t kSaStream = 0x7361ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kMcStream = 0x6d63ULL;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string& require_config(const CommonOptions& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  return c.config;
}

int worker_count(int requested, int tasks) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min(n, tasks));
}

// Runs fn(i) for i in [0, n). Results go into caller-owned slots keyed by i.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < worker_count(threads, n); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_manifest(OutputDir& out, const std::string& subcommand,
                    const CommonOptions& c, const json& options, const json& axes) {
  if (!c.config.empty()) out.write("config.json", read_text(c.config));
  json m;
  m["subcommand"] = subcommand;
  m["config_path"] = c.config;
  m["seed"] = c.seed;
  m["output_dir"] = out.target().generic_string();
  m["sweep_axes"] = axes;
  m["options"] = options;
  m["argv"] = c.argv;
  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  m["files"] = files;
  out.write("manifest.json", m.dump(2) + "\n");
}

json schedule_config_json(const ScheduleConfig& c) {
  return {{"mode", std::string(to_string(c.mode))},
          {"line_buffers", c.line_buffers},
          {"line_buffer_width", c.line_buffer_width},
          {"fm_read_bits", c.fm_read_bits},
          {"pipelined_pooling", c.pipelined_pooling},
          {"timesteps", c.timesteps},
          {"cycles_per_mac", c.cycles_per_mac},
          {"cycles_per_fm_read", c.cycles_per_fm_read},
          {"neurons", c.neurons},
          {"clock_hz", c.clock_hz}};
}

ScheduleReport write_schedule_outputs(OutputDir& out, const NetworkIR& net,
                                      const ScheduleConfig& cfg, bool trace) {
  const ScheduleReport r = simulate_schedule(net, cfg);
  const std::int64_t plain =
      simulate_pipeline(net, false, 1, cfg.cycles_per_mac, cfg.neurons);
  const std::int64_t piped =
      simulate_pipeline(net, true, 1, cfg.cycles_per_mac, cfg.neurons);
  json j;
  j["config"] = schedule_config_json(cfg);
  j["total_cycles"] = r.total_cycles;
  j["wall_time_s"] = r.wall_time_s;
  j["membrane_buffer_bits"] = r.membrane_buffer_bits;
  j["feature_buffer_bits"] = r.feature_buffer_bits;
  j["unique_reads"] = r.unique_reads;
  j["reused_reads"] = r.reused_reads;
  j["input_reuse_fraction"] = r.input_reuse_fraction;
  j["pipeline"] = {{"timesteps", 1},
                   {"non_pipelined_cycles", plain},
                   {"pipelined_cycles", piped},
                   {"reduction_percent",
                    plain == 0 ? 0.0 : 100.0 * (plain - piped) / static_cast<double>(plain)}};
  json layers = json::array();
  std::ostringstream csv;
  csv << "layer,kind,cycles,unique_reads,reused_reads\n";
  for (const LayerCycles& l : r.per_layer) {
    layers.push_back({{"layer", l.layer},
                      {"kind", std::string(to_string(l.kind))},
                      {"cycles", l.cycles},
                      {"unique_reads", l.unique_reads},
                      {"reused_reads", l.reused_reads}});
    csv << l.layer << ',' << to_string(l.kind) << ',' << l.cycles << ','
        << l.unique_reads << ',' << l.reused_reads << '\n';
  }
  csv << "total,," << r.total_cycles << ',' << r.unique_reads << ',' << r.reused_reads << '\n';
  j["per_layer"] = layers;
  out.write("schedule_report.json", j.dump(2) + "\n");
  out.write("schedule_report.csv", csv.str());
  if (trace) {
    std::ostringstream t;
    t << "kind,layer,block,timestep,start,cycles,unique_reads,reused_reads\n";
    for (const ScheduleEvent& e : r.events) {
      t << e.kind << ',' << e.layer << ',' << e.block << ',' << e.timestep << ','
        << e.start << ',' << e.cycles << ',' << e.unique_reads << ','
        << e.reused_reads << '\n';
    }
    out.write("trace.csv", t.str());
  }
  return r;
}

json energy_json(const EnergySummary& e) {
  return {{"total_sops", e.total_sops},
          {"duration_cycles", e.duration_cycles},
          {"duration_s", e.duration_s},
          {"block_energy_j", e.block_energy_j},
          {"energy_j", e.energy_j},
          {"inference_energy_j", e.inference_energy_j},
          {"pj_per_sop", e.pj_per_sop},
          {"tops_per_w", e.tops_per_w},
          {"tops_per_w_normalized", e.tops_per_w_normalized},
          {"fractions", e.fractions}};
}

std::vector<SpikeTensor> make_inputs(const NetworkIR& net, int samples, double density,
                                     std::uint64_t seed) {
  if (samples < 1) throw ConfigError("--samples must be >= 1");
  if (!(density >= 0 && density <= 1)) throw ConfigError("--density must be in [0,1]");
  std::vector<SpikeTensor> in;
  for (int i = 0; i < samples; ++i) {
    in.push_back(random_input(net, density,
                              hash_key({seed, kInputStream, static_cast<std::uint64_t>(i)})));
  }
  return in;
}

struct SampleResult {
  int predicted = -1;
  std::int64_t spikes = 0;
  std::int64_t sops = 0;
  std::int64_t flips = 0;
  std::int64_t decisions = 0;
  std::string spike_rows;
};

SampleResult run_sample(const NetworkIR& net, const MappingPlan& plan, CimArray& array,
                        const SpikeTensor& input, const LayerRunOptions& opts,
                        const ReferenceRun* ref, bool dump, int sample, double celsius) {
  const NetworkRun run = run_network(net, plan, array, input, opts);
  SampleResult s;
  s.predicted = run.predicted;
  s.sops = count_sops(net, run.layer_inputs);
  std::ostringstream rows;
  // The reference keeps conv1d and maxpool outputs only, in layer order.
  std::size_t ref_slot = 0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const LayerKind kind = net.layers()[l].kind;
    if (kind == LayerKind::kMaxPool) ++ref_slot;
    if (kind != LayerKind::kConv1d) continue;
    const SpikeTensor& o = run.layer_outputs[l];
    const SpikeTensor* want =
        ref != nullptr && ref_slot < ref->layer_outputs.size() ? &ref->layer_outputs[ref_slot]
                                                               : nullptr;
    ++ref_slot;
    s.spikes += o.count();
    if (want != nullptr && want->raw().size() == o.raw().size()) {
      const auto& a = o.raw();
      const auto& b = want->raw();
      for (std::size_t k = 0; k < a.size(); ++k) s.flips += a[k] != b[k];
      s.decisions += static_cast<std::int64_t>(a.size());
    }
    if (!dump) continue;
    for (int t = 0; t < o.timesteps(); ++t) {
      for (int c = 0; c < o.channels(); ++c) {
        for (int p = 0; p < o.length(); ++p) {
          if (!o.at(t, c, p)) continue;
          rows << c * o.length() + p << ',' << t << ",1," << l << ',' << sample << ','
               << num(celsius) << '\n';
        }
      }
    }
  }
  s.spike_rows = rows.str();
  return s;
}

double mean_of(const std::vector<RegulatorSolution>& r,
               double RegulatorSolution::*field) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : r) s += x.*field;
  return s / static_cast<double>(r.size());
}

}  // namespace

std::vector<double> parse_sweep(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("sweep '" + spec + "': expected start:stop:step");
    }
  }
  if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
    throw ConfigError("sweep '" + spec + "': expected start:stop:step with step > 0");
  }
  std::vector<double> out;
  const double n = std::floor((parts[1] - parts[0]) / parts[2] + 1e-9);
  for (int i = 0; i <= static_cast<int>(n); ++i) out.push_back(parts[0] + i * parts[2]);
  return out;
}

void cmd_infer(const InferOptions& o) {
  RunConfig rc = load_run_config(require_config(o.common));
  if (!o.mode.empty()) rc.schedule.mode = schedule_mode_from_string(o.mode);
  if (o.pipelined_pooling) rc.schedule.pipelined_pooling = true;
  if (o.ideal) {
    rc.device.sigma_mismatch = 0.0;
    rc.device.leak_fraction = 0.0;
    rc.sa.offset_sigma_mv = 0.0;
    rc.sa.noise_mv_rms = 0.0;
  }
  const std::vector<double> temps =
      o.temp_sweep.empty() ? std::vector<double>{o.celsius} : parse_sweep(o.temp_sweep);
  const NetworkIR& net = rc.net;
  const MappingPlan plan = validate_cim_mappability(net, rc.geometry);
  const std::uint64_t seed = o.common.seed;
  const auto inputs = make_inputs(net, o.samples, o.density, seed);
  std::vector<ReferenceRun> refs;
  for (const auto& x : inputs) refs.push_back(reference_forward(net, x));

  OutputDir out(resolve_out_dir(o.common.out));
  const ScheduleReport sched = write_schedule_outputs(out, net, rc.schedule, o.trace);

  struct TempResult {
    std::vector<SampleResult> samples;
    double v_r = 0.0;
    double unit_current = 0.0;
  };
  std::vector<TempResult> results(temps.size());
  parallel_for(static_cast<int>(temps.size()), 0, [&](int k) {
    CimArray array(rc.geometry, rc.device, hash_key({seed, kChipStream}));
    const SaNonidealities sa = sample_sa_nonidealities(
        rc.geometry.neurons(), rc.sa.offset_sigma_mv, rc.sa.noise_mv_rms,
        rc.sa.mv_per_unit, hash_key({seed, kSaStream}));
    TempResult& tr = results[k];
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      LayerRunOptions opts;
      opts.celsius = temps[k];
      opts.sa = o.ideal ? nullptr : &sa;
      opts.order = rc.schedule.mode;
      opts.noise_seed = hash_key({seed, kNoiseStream, static_cast<std::uint64_t>(i)});
      tr.samples.push_back(run_sample(net, plan, array, inputs[i], opts, &refs[i],
                                      o.dump_spikes, static_cast<int>(i), temps[k]));
    }
    if (array.mode() != ArrayMode::kCim) array.enter_cim_mode(temps[k]);
    std::vector<RegulatorSolution> regs;
    for (int s = 0; s < rc.geometry.subbanks(); ++s) regs.push_back(array.regulator(s));
    tr.v_r = mean_of(regs, &RegulatorSolution::v_r);
    tr.unit_current = mean_of(regs, &RegulatorSolution::monitor_current);
  });

  std::ostringstream rows, preds, spikes;
  preds << "celsius,sample,predicted,reference\n";
  spikes << "neuron,timestep,fired,layer,sample,celsius\n";
  json energy = json::array();
  Series agreement{"agreement with integer reference", {}, {}};
  for (std::size_t k = 0; k < temps.size(); ++k) {
    int agree = 0;
    std::int64_t spk = 0, sops = 0, flips = 0, decisions = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const SampleResult& s = results[k].samples[i];
      agree += s.predicted == refs[i].predicted;
      spk += s.spikes;
      sops += s.sops;
      flips += s.flips;
      decisions += s.decisions;
      preds << num(temps[k]) << ',' << i << ',' << s.predicted << ','
            << refs[i].predicted << '\n';
      spikes << s.spike_rows;
    }
    const std::int64_t cycles = sched.total_cycles * static_cast<std::int64_t>(inputs.size());
    const EnergySummary e = summarize_energy(sops, cycles, rc.energy);
    const double acc = static_cast<double>(agree) / static_cast<double>(inputs.size());
    rows << "infer," << num(temps[k]) << ',' << inputs.size() << ',' << num(acc) << ','
         << num(decisions == 0 ? 0.0 : static_cast<double>(flips) / decisions) << ','
         << spk << ',' << sops << ',' << cycles << ',' << num(e.energy_j) << ','
         << num(results[k].v_r) << ',' << num(results[k].unit_current * 1e9) << '\n';
    json ej = energy_json(e);
    ej["celsius"] = temps[k];
    energy.push_back(ej);
    agreement.x.push_back(temps[k]);
    agreement.y.push_back(acc);
  }
  out.append_rows("results.csv",
                  "subcommand,celsius,samples,reference_agreement,spike_flip_rate,spikes,"
                  "sops,cycles,energy_j,v_r_mean,monitor_current_na",
                  rows.str());
  out.write("predictions.csv", preds.str());
  if (o.dump_spikes) out.write("spikes.csv", spikes.str());
  if (o.energy_json) {
    json ej;
    ej["params"] = {{"e_sop", rc.energy.e_sop},       {"p_sa", rc.energy.p_sa},
                    {"p_ith", rc.energy.p_ith},       {"n_neurons", rc.energy.n_neurons},
                    {"p_chip", rc.energy.p_chip},     {"clock_hz", rc.energy.clock_hz},
                    {"include_static", rc.energy.include_static}};
    ej["ops_per_sop"] = kOpsPerSop;
    ej["threshold_generator_power_fraction"] = threshold_generator_power_fraction(rc.energy);
    const AreaCheck area = threshold_area_check();
    ej["area_check"] = {{"overhead_um2", area.overhead_um2},
                        {"chip_mm2", area.chip_mm2},
                        {"quoted_percent", area.quoted_percent},
                        {"computed_percent", area.computed_percent},
                        {"consistent", area.consistent}};
    ej["per_temperature"] = energy;
    out.write("energy.json", ej.dump(2) + "\n");
  }
  if (o.svg) {
    out.write("temperature.svg", svg_line_chart("Inference vs temperature", "temperature (C)",
                                                "agreement", {agreement}));
  }
  json options = {{"samples", o.samples},
                  {"density", o.density},
                  {"ideal", o.ideal},
                  {"mode", std::string(to_string(rc.schedule.mode))},
                  {"pipelined_pooling", rc.schedule.pipelined_pooling},
                  {"dump_spikes", o.dump_spikes},
                  {"trace", o.trace},
                  {"energy_json", o.energy_json},
                  {"svg", o.svg}};
  write_manifest(out, "infer", o.common, options,
                 {{"temperature", temps},
                  {"sigma", {rc.device.sigma_mismatch}},
                  {"timesteps", {net.timesteps()}},
                  {"schedule_mode", {std::string(to_string(rc.schedule.mode))}}});
  out.commit();
}

void cmd_schedule(const ScheduleOptions& o) {
  RunConfig rc = load_run_config(require_config(o.common));
  if (!o.mode.empty()) rc.schedule.mode = schedule_mode_from_string(o.mode);
  if (o.line_buffers > 0) rc.schedule.line_buffers = o.line_buffers;
  if (o.pipelined_pooling) rc.schedule.pipelined_pooling = true;
  rc.schedule.validate();
  OutputDir out(resolve_out_dir(o.common.out));
  write_schedule_outputs(out, rc.net, rc.schedule, o.trace);
  const std::vector<LatencyRow> lat = latency_comparison(rc.net, rc.schedule);
  std::ostringstream csv;
  csv << "layer,step_by_step_1lb,stride_tick_1lb,stride_tick_3lb\n";
  Series a{"step-by-step 1LB", {}, {}}, b{"stride-tick 1LB", {}, {}},
      c{"stride-tick 3LB", {}, {}};
  std::vector<std::string> cats;
  for (const LatencyRow& r : lat) {
    csv << r.layer << ',' << r.step_by_step_1lb << ',' << r.stride_tick_1lb << ','
        << r.stride_tick_3lb << '\n';
    cats.push_back("L" + std::to_string(r.layer));
    a.y.push_back(static_cast<double>(r.step_by_step_1lb));
    b.y.push_back(static_cast<double>(r.stride_tick_1lb));
    c.y.push_back(static_cast<double>(r.stride_tick_3lb));
  }
  out.write("latency.csv", csv.str());
  if (o.svg) {
    out.write("latency.svg",
              svg_bar_chart("Per-layer latency", "cycles", cats, {a, b, c}, true));
  }
  write_manifest(out, "schedule", o.common,
                 {{"trace", o.trace}, {"svg", o.svg}},
                 {{"schedule_mode", {std::string(to_string(rc.schedule.mode))}},
                  {"line_buffers", {rc.schedule.line_buffers}},
                  {"pipelined_pooling", {rc.schedule.pipelined_pooling}},
                  {"timesteps", {rc.net.timesteps()}}});
  out.commit();
}

void cmd_train(const TrainOptions& o) {
  TrainConfig cfg = parse_train_config(read_text(require_config(o.common)));
  if (o.seed_given) cfg.seed = o.common.seed;
  if (o.zero_variation) cfg.variation = VariationProfile::none();
  cfg.validate();
  OutputDir out(resolve_out_dir(o.common.out));

  SnnModel model(cfg.net, cfg.from_timesteps, cfg.seed);
  const TrainReport rep = run_training(cfg, &model);
  const NetworkIR ir = model.to_ir(cfg.ternary_threshold);
  ScheduleConfig sc;
  sc.neurons = cfg.geometry.neurons();
  sc.timesteps = cfg.from_timesteps;
  const std::int64_t cycles_from =
      simulate_schedule(ir.with_timesteps(cfg.from_timesteps), sc).total_cycles;
  sc.timesteps = ir.timesteps();
  const std::int64_t cycles_final = simulate_schedule(ir, sc).total_cycles;

  std::ostringstream row;
  row << cfg.seed << ',' << rep.final_timesteps << ',' << num(rep.triple.ideal_acc) << ','
      << num(rep.triple.degraded_acc) << ',' << num(rep.triple.recovered_acc) << ','
      << cycles_from << ',' << cycles_final << '\n';
  out.append_rows("results.csv",
                  "seed,final_timesteps,ideal_acc,degraded_acc,recovered_acc,"
                  "cycles_from_timesteps,cycles_final",
                  row.str());

  json stages = json::array();
  for (const auto& [name, acc] : rep.stage_accuracy) {
    stages.push_back({{"stage", name}, {"accuracy", acc}});
  }
  json j;
  j["seed"] = cfg.seed;
  j["stages"] = stages;
  j["accuracy"] = {{"ideal", rep.triple.ideal_acc},
                   {"degraded", rep.triple.degraded_acc},
                   {"recovered", rep.triple.recovered_acc}};
  j["final_timesteps"] = rep.final_timesteps;
  j["cycles"] = {{"from_timesteps", cycles_from}, {"final", cycles_final}};
  j["variation"] = {{"sigma_mismatch", cfg.variation.sigma_mismatch},
                    {"offset_sigma_mV", cfg.variation.offset_sigma_mv},
                    {"noise_mV_rms", cfg.variation.noise_mv_rms},
                    {"mV_per_unit", cfg.variation.mv_per_unit},
                    {"leak_fraction", cfg.variation.leak_fraction}};
  out.write("train_report.json", j.dump(2) + "\n");
  out.write("model.json", emit_config(ir, "weights.bin"));
  write_network_weights(ir, out.path("weights.bin"));
  out.adopt("weights.bin");
  write_manifest(out, "train", o.common,
                 {{"seed_given", o.seed_given}, {"zero_variation", o.zero_variation},
                  {"effective_seed", cfg.seed}},
                 {{"sigma", {cfg.variation.sigma_mismatch}},
                  {"timesteps", {cfg.from_timesteps, cfg.target_timesteps}}});
  out.commit();
}

void cmd_device_sweep(const DeviceSweepOptions& o) {
  DeviceParams dev;
  ArrayGeometry geo;
  if (!o.common.config.empty()) {
    const RunConfig rc = load_run_config(o.common.config);
    dev = rc.device;
    geo = rc.geometry;
  }
  if (o.seeds < 1) throw ConfigError("--seeds must be >= 1");
  const std::vector<double> temps = parse_sweep(o.temp_sweep);
  const std::vector<RegulationPoint> pts =
      regulation_sweep(geo, dev, temps, o.seeds, hash_key({o.common.seed, kChipStream}));

  OutputDir out(resolve_out_dir(o.common.out));
  std::ostringstream csv;
  csv << "celsius,v_r_mean,v_r_min,v_r_max,monitor_current_na,unit_current_na,"
         "fixed_supply_current_na,leakage_regulated_na,leakage_nominal_na\n";
  Series reg{"regulated", {}, {}}, fixed{"fixed supply", {}, {}};
  double lo_r = 1e300, hi_r = 0, lo_f = 1e300, hi_f = 0, sum = 0;
  for (const RegulationPoint& p : pts) {
    csv << num(p.celsius) << ',' << num(p.v_r_mean) << ',' << num(p.v_r_min) << ','
        << num(p.v_r_max) << ',' << num(p.monitor_current * 1e9) << ','
        << num(p.unit_current * 1e9) << ',' << num(p.fixed_supply_current * 1e9) << ','
        << num(p.leakage_regulated * 1e9) << ',' << num(p.leakage_nominal * 1e9) << '\n';
    reg.x.push_back(p.celsius);
    reg.y.push_back(p.monitor_current * 1e9);
    fixed.x.push_back(p.celsius);
    fixed.y.push_back(p.fixed_supply_current * 1e9);
    lo_r = std::min(lo_r, p.monitor_current);
    hi_r = std::max(hi_r, p.monitor_current);
    lo_f = std::min(lo_f, p.fixed_supply_current);
    hi_f = std::max(hi_f, p.fixed_supply_current);
    sum += p.monitor_current;
  }
  out.write("device_sweep.csv", csv.str());
  json s;
  s["points"] = pts.size();
  s["seeds"] = o.seeds;
  s["mean_monitor_current_na"] = sum / static_cast<double>(pts.size()) * 1e9;
  s["target_current_na"] = dev.i_unit_target * 1e9;
  s["regulated_ratio"] = hi_r / lo_r;
  s["fixed_supply_ratio"] = hi_f / lo_f;
  out.write("device_sweep.json", s.dump(2) + "\n");
  if (o.svg) {
    out.write("temperature.svg",
              svg_line_chart("Cell current vs temperature", "temperature (C)",
                             "current (nA)", {reg, fixed}, true));
  }
  write_manifest(out, "device-sweep", o.common, {{"seeds", o.seeds}, {"svg", o.svg}},
                 {{"temperature", temps}, {"sigma", {dev.sigma_mismatch}}});
  out.commit();
}

void cmd_montecarlo(const MonteCarloOptions& o) {
  RunConfig rc = load_run_config(require_config(o.common));
  if (o.sigma >= 0) rc.device.sigma_mismatch = o.sigma;
  rc.device.validate();
  if (o.instances < 1) throw ConfigError("--instances must be >= 1");
  const NetworkIR& net = rc.net;
  const MappingPlan plan = validate_cim_mappability(net, rc.geometry);
  const std::uint64_t seed = o.common.seed;
  const auto inputs = make_inputs(net, o.samples, o.density, seed);
  std::vector<ReferenceRun> refs;
  for (const auto& x : inputs) refs.push_back(reference_forward(net, x));

  struct Instance {
    std::uint64_t chip_seed = 0;
    int agree = 0;
    std::int64_t flips = 0, decisions = 0, sops = 0;
  };
  std::vector<Instance> inst(o.instances);
  parallel_for(o.instances, o.threads, [&](int i) {
    Instance& r = inst[i];
    r.chip_seed = hash_key({seed, kMcStream, static_cast<std::uint64_t>(i)});
    CimArray array(rc.geometry, rc.device, r.chip_seed);
    const SaNonidealities sa = sample_sa_nonidealities(
        rc.geometry.neurons(), rc.sa.offset_sigma_mv, rc.sa.noise_mv_rms,
        rc.sa.mv_per_unit, hash_key({r.chip_seed, kSaStream}));
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      LayerRunOptions opts;
      opts.celsius = o.celsius;
      opts.sa = &sa;
      opts.order = rc.schedule.mode;
      opts.noise_seed = hash_key({r.chip_seed, kNoiseStream, static_cast<std::uint64_t>(k)});
      const SampleResult s = run_sample(net, plan, array, inputs[k], opts, &refs[k],
                                        false, static_cast<int>(k), o.celsius);
      r.agree += s.predicted == refs[k].predicted;
      r.flips += s.flips;
      r.decisions += s.decisions;
      r.sops += s.sops;
    }
  });

  OutputDir out(resolve_out_dir(o.common.out));
  std::ostringstream csv;
  csv << "instance,chip_seed,reference_agreement,spike_flip_rate,sops\n";
  double mean = 0, sq = 0;
  for (int i = 0; i < o.instances; ++i) {
    const Instance& r = inst[i];
    const double acc = static_cast<double>(r.agree) / static_cast<double>(inputs.size());
    mean += acc;
    sq += acc * acc;
    csv << i << ',' << r.chip_seed << ',' << num(acc) << ','
        << num(r.decisions == 0 ? 0.0 : static_cast<double>(r.flips) / r.decisions) << ','
        << r.sops << '\n';
  }
  mean /= o.instances;
  out.write("montecarlo.csv", csv.str());
  json s;
  s["instances"] = o.instances;
  s["samples"] = o.samples;
  s["celsius"] = o.celsius;
  s["sigma_mismatch"] = rc.device.sigma_mismatch;
  s["mean_reference_agreement"] = mean;
  s["std_reference_agreement"] = std::sqrt(std::max(0.0, sq / o.instances - mean * mean));
  out.write("montecarlo.json", s.dump(2) + "\n");
  write_manifest(out, "montecarlo", o.common,
                 {{"instances", o.instances}, {"samples", o.samples}, {"density", o.density}},
                 {{"temperature", {o.celsius}}, {"sigma", {rc.device.sigma_mismatch}}});
  out.commit();
}

void cmd_export_keyword_ref(const ExportOptions& o) {
  const NetworkIR net = make_keyword_ref(o.common.seed, o.nonzero);
  OutputDir out(resolve_out_dir(o.common.out));
  out.write("keyword_ref.json", emit_config(net, "keyword_ref.bin"));
  write_network_weights(net, out.path("keyword_ref.bin"));
  out.adopt("keyword_ref.bin");
  write_manifest(out, "export-keyword-ref", o.common, {{"nonzero", o.nonzero}}, json::object());
  out.commit();
}

}  // namespace cimsnn::cli

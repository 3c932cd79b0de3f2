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

#include "cimsnn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cimsnn/errors.hpp"
#include "json.hpp"

namespace cimsnn {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.contains(name_)) return;
    obj_ = &doc.at(name_);
    if (!obj_->is_object()) throw ConfigError(name_ + ": expected an object");
  }
  Section(const json* obj, std::string name) : obj_(obj), name_(std::move(name)) {}

  bool present() const { return obj_ != nullptr; }
  const json* raw() const { return obj_; }

  void number(const char* key, double* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    *out = v.get<double>();
  }
  void integer(const char* key, int* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    *out = v.get<int>();
  }
  void seed(const char* key, std::uint64_t* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    *out = v.get<std::uint64_t>();
  }
  void boolean(const char* key, bool* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    *out = v.get<bool>();
  }
  void string(const char* key, std::string* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    *out = v.get<std::string>();
  }
  void range(const char* key, double* lo, double* hi) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(where(key) + ": expected [min, max]");
    }
    *lo = v[0].get<double>();
    *hi = v[1].get<double>();
  }
  void int_list(const char* key, std::vector<int>* out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of integers");
    out->clear();
    for (const json& e : v) {
      if (!e.is_number_integer()) throw ConfigError(where(key) + ": expected integers");
      out->push_back(e.get<int>());
    }
  }
  Section child(const char* key) {
    seen_.push_back(key);
    if (!has(key)) return Section(nullptr, name_ + "." + key);
    const json& v = obj_->at(key);
    if (!v.is_object()) throw ConfigError(where(key) + ": expected an object");
    return Section(&v, name_ + "." + key);
  }
  // Rejects keys that no accessor asked for.
  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [k, v] : obj_->items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw ConfigError(name_ + ": unknown field '" + k + "'");
      }
    }
  }

 private:
  bool has(const char* key) const { return obj_ != nullptr && obj_->contains(key); }
  std::string where(const char* key) const { return name_ + "." + key; }

  const json* obj_ = nullptr;
  std::string name_;
  std::vector<std::string> seen_;
};

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

void read_device(Section s, DeviceParams* p) {
  s.number("I0", &p->i0);
  s.number("n", &p->n);
  s.number("Vth0", &p->vth0);
  s.number("dVth_dT", &p->dvth_dt);
  s.number("sigma_mismatch", &p->sigma_mismatch);
  s.range("T_range", &p->t_min, &p->t_max);
  s.number("I_unit_target", &p->i_unit_target);
  s.number("leak_fraction", &p->leak_fraction);
  s.number("v_max", &p->v_max);
  s.number("regulator_tolerance", &p->regulator_tolerance);
  s.finish();
  p->validate();
}

ArrayGeometry read_array(Section s, ArrayGeometry base) {
  int rows = base.rows();
  int cols = base.cols();
  int neurons = base.neurons();
  int subbanks = base.subbanks();
  int monitor = base.monitor_cells();
  s.integer("rows", &rows);
  s.integer("cols", &cols);
  s.integer("neurons", &neurons);
  s.integer("subbanks", &subbanks);
  s.integer("monitor_cells", &monitor);
  s.finish();
  return ArrayGeometry(rows, cols, neurons, subbanks, monitor);
}

void read_variation(Section s, VariationProfile* v) {
  s.number("sigma_mismatch", &v->sigma_mismatch);
  s.number("offset_sigma_mV", &v->offset_sigma_mv);
  s.number("noise_mV_rms", &v->noise_mv_rms);
  s.number("mV_per_unit", &v->mv_per_unit);
  s.number("leak_fraction", &v->leak_fraction);
  s.finish();
  v->validate();
}

}  // namespace

DeviceParams parse_device_params(const std::string& json_text) {
  const json doc = parse_json(json_text, "device section");
  if (!doc.is_object()) throw ConfigError("device: expected an object");
  DeviceParams p;
  read_device(Section(&doc, "device"), &p);
  return p;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  NetworkIR net = parse_network_config(text, path.parent_path());
  const json doc = parse_json(text, "config");
  RunConfig rc{path, std::move(net), {}, {}, {}, {}, {}};

  read_device(Section(doc, "device"), &rc.device);
  rc.geometry = read_array(Section(doc, "array"), ArrayGeometry());

  Section sa(doc, "sa");
  sa.number("offset_sigma_mV", &rc.sa.offset_sigma_mv);
  sa.number("noise_mV_rms", &rc.sa.noise_mv_rms);
  sa.number("mV_per_unit", &rc.sa.mv_per_unit);
  sa.finish();
  if (rc.sa.offset_sigma_mv < 0 || rc.sa.noise_mv_rms < 0 || !(rc.sa.mv_per_unit > 0)) {
    throw ConfigError("sa: sigmas must be >= 0 and mV_per_unit > 0");
  }

  Section sc(doc, "schedule");
  std::string mode(to_string(rc.schedule.mode));
  sc.string("mode", &mode);
  rc.schedule.mode = schedule_mode_from_string(mode);
  sc.integer("line_buffers", &rc.schedule.line_buffers);
  sc.integer("line_buffer_width", &rc.schedule.line_buffer_width);
  sc.integer("fm_read_bits", &rc.schedule.fm_read_bits);
  sc.boolean("pipelined_pooling", &rc.schedule.pipelined_pooling);
  sc.integer("cycles_per_mac", &rc.schedule.cycles_per_mac);
  sc.integer("cycles_per_fm_read", &rc.schedule.cycles_per_fm_read);
  sc.number("clock_hz", &rc.schedule.clock_hz);
  sc.finish();
  rc.schedule.timesteps = rc.net.timesteps();
  rc.schedule.neurons = rc.geometry.neurons();
  rc.schedule.validate();

  Section en(doc, "energy");
  en.number("e_sop", &rc.energy.e_sop);
  en.number("p_sa", &rc.energy.p_sa);
  en.number("p_ith", &rc.energy.p_ith);
  en.integer("n_neurons", &rc.energy.n_neurons);
  en.number("p_chip", &rc.energy.p_chip);
  en.number("clock_hz", &rc.energy.clock_hz);
  en.boolean("include_static", &rc.energy.include_static);
  en.number("input_bits", &rc.energy.input_bits);
  en.number("weight_bits", &rc.energy.weight_bits);
  en.number("process_nm", &rc.energy.process_nm);
  en.finish();
  rc.energy.validate();
  return rc;
}

TrainConfig parse_train_config(const std::string& json_text) {
  const json doc = parse_json(json_text, "train config");
  if (!doc.is_object()) throw ConfigError("train config: expected an object");
  TrainConfig c;
  const json* root = &doc;
  if (doc.size() == 1 && doc.contains("train")) {
    root = &doc.at("train");
    if (!root->is_object()) throw ConfigError("train: expected an object");
  }
  Section s(root, "train");
  s.seed("seed", &c.seed);
  Section task = s.child("task");
  std::string pattern(to_string(c.task.pattern));
  task.string("pattern", &pattern);
  c.task.pattern = toy_pattern_from_string(pattern);
  task.integer("channels", &c.task.channels);
  task.integer("length", &c.task.length);
  task.integer("groups", &c.task.groups);
  task.number("p_active", &c.task.p_active);
  task.number("p_background", &c.task.p_background);
  task.integer("event_length", &c.task.event_length);
  task.finish();
  c.net.input_channels = c.task.channels;
  c.net.input_length = c.task.length;
  Section net = s.child("net");
  net.int_list("hidden", &c.net.hidden);
  net.integer("kernel", &c.net.kernel);
  net.integer("pool", &c.net.pool);
  net.boolean("spiking_readout", &c.net.spiking_readout);
  net.finish();
  s.integer("train_samples", &c.train_samples);
  s.integer("test_samples", &c.test_samples);
  s.integer("batch", &c.batch);
  Section ep = s.child("epochs");
  ep.integer("pretrain", &c.pretrain_epochs);
  ep.integer("quantize", &c.quantize_epochs);
  ep.integer("prune", &c.prune_epochs);
  ep.integer("finetune", &c.finetune_epochs);
  ep.finish();
  s.number("lr", &c.lr);
  s.number("lr_decay", &c.lr_decay);
  s.number("finetune_lr", &c.finetune_lr);
  s.number("surrogate_slope", &c.surrogate_slope);
  s.number("logit_scale", &c.logit_scale);
  s.number("ternary_threshold", &c.ternary_threshold);
  s.integer("from_timesteps", &c.from_timesteps);
  s.integer("target_timesteps", &c.target_timesteps);
  read_variation(s.child("variation"), &c.variation);
  s.integer("n_mc", &c.n_mc);
  c.geometry = read_array(s.child("array"), c.geometry);
  s.finish();
  c.validate();
  return c;
}

}  // namespace cimsnn

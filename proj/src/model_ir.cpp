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

#include "cimsnn/model_ir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cimsnn/errors.hpp"
#include "cimsnn/tensor_io.hpp"
#include "json.hpp"

namespace cimsnn {

namespace {

using nlohmann::json;

std::string layer_tag(std::size_t i) {
  return "layers[" + std::to_string(i) + "]";
}

int conv_out_length(const LayerSpec& l, int in_length) {
  const int span = in_length + 2 * l.padding - l.kernel;
  if (span < 0) return 0;
  return span / l.stride + 1;
}

int require_int(const json& obj, const std::string& key,
                const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError(where + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

int optional_int(const json& obj, const std::string& key,
                 const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  return require_int(obj, key, where);
}

void check_known_keys(const json& obj, std::initializer_list<const char*> keys,
                      const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(),
                     [&](const char* known) { return k == known; })) {
      throw ConfigError(where + ": unknown field '" + k + "'");
    }
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv1d:
      return "conv1d";
    case LayerKind::kMaxPool:
      return "maxpool";
    case LayerKind::kAvgPool:
      return "avgpool";
    case LayerKind::kAccumulateHead:
      return "accumulate-head";
    case LayerKind::kClassifier:
      return "classifier";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (LayerKind k : {LayerKind::kConv1d, LayerKind::kMaxPool,
                      LayerKind::kAvgPool, LayerKind::kAccumulateHead,
                      LayerKind::kClassifier}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

bool LayerSpec::has_weights() const {
  return kind == LayerKind::kConv1d || kind == LayerKind::kAccumulateHead ||
         kind == LayerKind::kClassifier;
}

bool LayerSpec::on_cim() const {
  return kind == LayerKind::kConv1d || kind == LayerKind::kAccumulateHead;
}

TernaryWeights::TernaryWeights(int out_ch, int in_ch, int k)
    : out(out_ch),
      in(in_ch),
      kernel(k),
      w(static_cast<std::size_t>(out_ch) * in_ch * k, 0) {}

SpikeTensor::SpikeTensor(int timesteps, int channels, int length)
    : timesteps_(timesteps),
      channels_(channels),
      length_(length),
      v_(static_cast<std::size_t>(timesteps) * channels * length, 0) {
  if (timesteps < 0 || channels < 0 || length < 0) {
    throw ShapeError("spike tensor dims must be non-negative");
  }
}

std::int64_t SpikeTensor::count() const {
  return std::count(v_.begin(), v_.end(), std::uint8_t{1});
}

NetworkIR::NetworkIR(std::string name, std::vector<LayerSpec> layers,
                     int timesteps, int input_channels, int input_length,
                     std::vector<TernaryWeights> weights)
    : name_(std::move(name)),
      layers_(std::move(layers)),
      timesteps_(timesteps),
      input_channels_(input_channels),
      input_length_(input_length),
      weights_(std::move(weights)) {
  if (timesteps_ < 1 || timesteps_ > 3) {
    throw ConfigError("timesteps out of range: " + std::to_string(timesteps_) +
                      " (expected 1..3)");
  }
  if (input_channels_ < 1) throw ConfigError("input_channels must be >= 1");
  if (input_length_ < 1) throw ConfigError("input_length must be >= 1");

  int channels = input_channels_;
  int length = input_length_;
  bool seen_head = false;
  bool seen_counts = false;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const std::string tag = layer_tag(i);
    if (l.in_channels < 1 || l.out_channels < 1 || l.kernel < 1 ||
        l.stride < 1 || l.pool < 1 || l.padding < 0) {
      throw ConfigError(tag + ": channels, kernel, stride and pool must be >= 1");
    }
    if (i + 1 < layers_.size() && l.kind == LayerKind::kClassifier) {
      throw ConfigError(tag + ": classifier must be the last layer");
    }
    LayerShape shape{channels, length, 0, 0};
    switch (l.kind) {
      case LayerKind::kConv1d:
      case LayerKind::kAccumulateHead: {
        if (seen_head) {
          throw ConfigError(tag + ": CIM layer after the accumulate-head");
        }
        if (seen_counts) throw ConfigError(tag + ": CIM layer after avgpool");
        if (l.in_channels != channels) {
          throw ConfigError(tag + ": shape chain mismatch, in_channels " +
                            std::to_string(l.in_channels) + " but previous layer gives " +
                            std::to_string(channels));
        }
        shape.out_channels = l.out_channels;
        shape.out_length = conv_out_length(l, length);
        if (shape.out_length < 1) {
          throw ConfigError(tag + ": kernel longer than the padded input");
        }
        seen_head = l.kind == LayerKind::kAccumulateHead;
        break;
      }
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool: {
        if (l.kind == LayerKind::kMaxPool && seen_head) {
          throw ConfigError(tag + ": maxpool after the accumulate-head");
        }
        if (l.kind == LayerKind::kMaxPool && seen_counts) {
          throw ConfigError(tag + ": maxpool after avgpool");
        }
        if (l.kind == LayerKind::kAvgPool) seen_counts = true;
        if (l.in_channels != channels || l.out_channels != channels) {
          throw ConfigError(tag + ": shape chain mismatch on pooling channels");
        }
        shape.out_channels = channels;
        shape.out_length = length / l.pool;
        if (shape.out_length < 1) {
          throw ConfigError(tag + ": pool window longer than the input");
        }
        break;
      }
      case LayerKind::kClassifier: {
        if (l.in_channels != channels * length) {
          throw ConfigError(tag + ": classifier in_channels must equal " +
                            std::to_string(channels * length));
        }
        if (l.kernel != 1) throw ConfigError(tag + ": classifier kernel must be 1");
        shape.out_channels = l.out_channels;
        shape.out_length = 1;
        break;
      }
    }
    if (l.has_weights()) {
      if (slot >= weights_.size()) {
        throw ConfigError(tag + ": missing weight tensor");
      }
      const TernaryWeights& w = weights_[slot];
      if (w.out != l.out_channels || w.in != l.in_channels ||
          w.kernel != l.kernel ||
          w.w.size() != static_cast<std::size_t>(w.out) * w.in * w.kernel) {
        throw ConfigError(tag + ": weight tensor dims do not match the layer");
      }
      for (std::int8_t v : w.w) {
        if (v < -1 || v > 1) {
          throw ConfigError(tag + ": weight value " + std::to_string(v) +
                            " outside {-1,0,+1}");
        }
      }
      weight_slot_.push_back(static_cast<int>(slot++));
    } else {
      weight_slot_.push_back(-1);
    }
    shapes_.push_back(shape);
    channels = shape.out_channels;
    length = shape.out_length;
  }
  if (slot != weights_.size()) {
    throw ConfigError("weights: " + std::to_string(weights_.size()) +
                      " tensors supplied for " + std::to_string(slot) +
                      " weighted layers");
  }
}

const TernaryWeights& NetworkIR::weights_for(std::size_t layer) const {
  if (layer >= layers_.size() || weight_slot_[layer] < 0) {
    throw ConfigError(layer_tag(layer) + " has no weights");
  }
  return weights_[weight_slot_[layer]];
}

std::vector<std::size_t> NetworkIR::weighted_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].has_weights()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> NetworkIR::cim_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].on_cim()) out.push_back(i);
  }
  return out;
}

int NetworkIR::output_channels() const {
  return shapes_.empty() ? input_channels_ : shapes_.back().out_channels;
}

int NetworkIR::output_length() const {
  return shapes_.empty() ? input_length_ : shapes_.back().out_length;
}

NetworkIR NetworkIR::with_timesteps(int timesteps) const {
  return NetworkIR(name_, layers_, timesteps, input_channels_, input_length_,
                   weights_);
}

NetworkIR NetworkIR::with_weights(std::vector<TernaryWeights> weights) const {
  return NetworkIR(name_, layers_, timesteps_, input_channels_, input_length_,
                   std::move(weights));
}

NetworkIR parse_network_config(std::string_view text,
                               const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  if (!doc.contains("layers") || !doc.at("layers").is_array()) {
    throw ConfigError("config: missing field 'layers' (array)");
  }
  const int timesteps = require_int(doc, "timesteps", "config");
  const int input_length = require_int(doc, "input_length", "config");
  std::string name = "network";
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ConfigError("config.name: expected a string");
    name = doc.at("name").get<std::string>();
  }

  std::vector<LayerSpec> layers;
  const json& jl = doc.at("layers");
  int channels = 0;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const json& o = jl[i];
    const std::string tag = layer_tag(i);
    if (!o.is_object()) throw ConfigError(tag + ": expected an object");
    check_known_keys(o, {"kind", "in_channels", "out_channels", "kernel",
                         "stride", "padding", "pool"},
                     tag);
    if (!o.contains("kind") || !o.at("kind").is_string()) {
      throw ConfigError(tag + ": missing field 'kind'");
    }
    LayerSpec l;
    try {
      l.kind = layer_kind_from_string(o.at("kind").get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(tag + ".kind: " + e.what());
    }
    if (l.kind == LayerKind::kMaxPool || l.kind == LayerKind::kAvgPool) {
      const int c = i == 0 ? optional_int(doc, "input_channels", "config", 1)
                           : channels;
      l.in_channels = optional_int(o, "in_channels", tag, c);
      l.out_channels = optional_int(o, "out_channels", tag, l.in_channels);
      l.pool = require_int(o, "pool", tag);
      l.kernel = 1;
      l.stride = l.pool;
    } else {
      l.in_channels = require_int(o, "in_channels", tag);
      l.out_channels = require_int(o, "out_channels", tag);
      l.kernel = optional_int(o, "kernel", tag, 1);
      l.stride = optional_int(o, "stride", tag, 1);
      l.padding = optional_int(o, "padding", tag, 0);
    }
    channels = l.out_channels;
    layers.push_back(l);
  }
  int input_channels = 1;
  if (doc.contains("input_channels")) {
    input_channels = require_int(doc, "input_channels", "config");
  } else if (!layers.empty()) {
    input_channels = layers.front().in_channels;
  }

  std::vector<TernaryWeights> weights;
  const bool needs_weights = std::any_of(
      layers.begin(), layers.end(), [](const LayerSpec& l) { return l.has_weights(); });
  if (needs_weights) {
    if (!doc.contains("weights_file") || !doc.at("weights_file").is_string()) {
      throw ConfigError("config: missing field 'weights_file'");
    }
    std::filesystem::path wpath = doc.at("weights_file").get<std::string>();
    if (wpath.is_relative()) wpath = base_dir / wpath;
    if (!std::filesystem::exists(wpath)) {
      throw IoError("weights_file not found: " + wpath.string());
    }
    const std::vector<Int8Tensor> records = read_tensor_file(wpath);
    std::size_t r = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const LayerSpec& l = layers[i];
      if (!l.has_weights()) continue;
      if (r >= records.size()) {
        throw ConfigError("weights_file: no tensor record for " + layer_tag(i));
      }
      const Int8Tensor& t = records[r++];
      const std::uint32_t k = t.dims[2];
      if (t.dims[0] != static_cast<std::uint32_t>(l.out_channels) ||
          t.dims[1] != static_cast<std::uint32_t>(l.in_channels) ||
          k != static_cast<std::uint32_t>(l.kernel) || t.dims[3] != 1) {
        throw ConfigError("weights_file: record dims do not match " + layer_tag(i));
      }
      TernaryWeights w(l.out_channels, l.in_channels, l.kernel);
      w.w = t.data;
      weights.push_back(std::move(w));
    }
    if (r != records.size()) {
      throw ConfigError("weights_file: " + std::to_string(records.size() - r) +
                        " unused tensor records");
    }
  }
  return NetworkIR(std::move(name), std::move(layers), timesteps, input_channels,
                   input_length, std::move(weights));
}

NetworkIR load_network_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network_config(ss.str(), path.parent_path());
}

std::string emit_config(const NetworkIR& net, const std::string& weights_file) {
  json doc;
  doc["name"] = net.name();
  doc["timesteps"] = net.timesteps();
  doc["input_channels"] = net.input_channels();
  doc["input_length"] = net.input_length();
  json layers = json::array();
  for (const LayerSpec& l : net.layers()) {
    json o;
    o["kind"] = std::string(to_string(l.kind));
    o["in_channels"] = l.in_channels;
    o["out_channels"] = l.out_channels;
    if (l.kind == LayerKind::kMaxPool || l.kind == LayerKind::kAvgPool) {
      o["pool"] = l.pool;
    } else {
      o["kernel"] = l.kernel;
      o["stride"] = l.stride;
      o["padding"] = l.padding;
    }
    layers.push_back(o);
  }
  doc["layers"] = layers;
  if (!net.weights().empty()) doc["weights_file"] = weights_file;
  return doc.dump(2) + "\n";
}

void write_network_weights(const NetworkIR& net,
                           const std::filesystem::path& path) {
  std::vector<Int8Tensor> records;
  for (const TernaryWeights& w : net.weights()) {
    Int8Tensor t({static_cast<std::uint32_t>(w.out),
                  static_cast<std::uint32_t>(w.in),
                  static_cast<std::uint32_t>(w.kernel), 1});
    t.data = w.w;
    records.push_back(std::move(t));
  }
  write_tensor_file(path, records);
}

std::vector<std::int8_t> ternary_quantize(std::span<const double> real_weights,
                                          double threshold_fraction) {
  if (real_weights.empty()) throw ShapeError("ternary_quantize: empty tensor");
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw ConfigError("ternary_quantize: threshold_fraction must be in (0,1)");
  }
  double max_abs = 0.0;
  for (double w : real_weights) max_abs = std::max(max_abs, std::abs(w));
  const double tau = threshold_fraction * max_abs;
  std::vector<std::int8_t> q(real_weights.size(), 0);
  for (std::size_t i = 0; i < real_weights.size(); ++i) {
    if (real_weights[i] > tau) {
      q[i] = 1;
    } else if (real_weights[i] < -tau) {
      q[i] = -1;
    }
  }
  return q;
}

const LayerPlacement& MappingPlan::for_layer(int layer) const {
  for (const auto& p : placements) {
    if (p.layer == layer) return p;
  }
  throw MappingError(layer_tag(layer) + " is not mapped");
}

MappingPlan validate_cim_mappability(const NetworkIR& net,
                                     const ArrayGeometry& geometry) {
  MappingPlan plan;
  int page = 0;
  int shelf_row = 0;
  int shelf_height = 0;
  int cursor = 0;
  bool any = false;
  for (std::size_t i : net.cim_layers()) {
    const LayerSpec& l = net.layers()[i];
    const int rows = l.in_channels * l.kernel;
    if (rows > geometry.rows()) {
      throw MappingError("partial-sum required: " + layer_tag(i) + " needs " +
                         std::to_string(rows) + " rows but the array has " +
                         std::to_string(geometry.rows()));
    }
    if (l.out_channels > geometry.pair_count()) {
      throw MappingError(layer_tag(i) + " needs " + std::to_string(l.out_channels) +
                         " column pairs but the array has " +
                         std::to_string(geometry.pair_count()));
    }
    if (cursor + l.out_channels > geometry.pair_count()) {
      shelf_row += shelf_height;
      shelf_height = 0;
      cursor = 0;
    }
    if (shelf_row + rows > geometry.rows()) {
      ++page;
      shelf_row = 0;
      shelf_height = 0;
      cursor = 0;
    }
    plan.placements.push_back(
        {static_cast<int>(i), shelf_row, rows, cursor, l.out_channels, page});
    cursor += l.out_channels;
    shelf_height = std::max(shelf_height, rows);
    any = true;
  }
  plan.pages = any ? page + 1 : 0;
  return plan;
}

MappingPlan validate_cim_mappability(const NetworkIR& net, int array_rows,
                                     int array_cols) {
  if (array_rows < 1 || array_cols < 1) {
    throw ConfigError("array dimensions must be positive");
  }
  if (array_rows == 1024 && array_cols == 1304) {
    return validate_cim_mappability(net, ArrayGeometry());
  }
  return validate_cim_mappability(net, ArrayGeometry::scaled(array_rows, array_cols));
}

}  // namespace cimsnn

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

#ifndef CIMSNN_MODEL_IR_HPP_
#define CIMSNN_MODEL_IR_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cimsnn/geometry.hpp"

namespace cimsnn {

enum class LayerKind { kConv1d, kMaxPool, kAvgPool, kAccumulateHead, kClassifier };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::kConv1d;
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int pool = 1;

  // conv1d, accumulate-head and classifier carry a ternary weight tensor.
  bool has_weights() const;
  // Layers whose weights live in the CIM macro.
  bool on_cim() const;

  bool operator==(const LayerSpec&) const = default;
};

// Ternary weights indexed (out, in, k). Classifier tensors use kernel = 1.
struct TernaryWeights {
  int out = 0;
  int in = 0;
  int kernel = 1;
  std::vector<std::int8_t> w;

  TernaryWeights() = default;
  TernaryWeights(int out_ch, int in_ch, int k);

  std::int8_t& at(int o, int c, int k) {
    return w[(static_cast<std::size_t>(o) * in + c) * kernel + k];
  }
  std::int8_t at(int o, int c, int k) const {
    return w[(static_cast<std::size_t>(o) * in + c) * kernel + k];
  }

  bool operator==(const TernaryWeights&) const = default;
};

struct LayerShape {
  int in_channels = 0;
  int in_length = 0;
  int out_channels = 0;
  int out_length = 0;
  bool operator==(const LayerShape&) const = default;
};

// Binary spikes indexed (timestep, channel, position).
class SpikeTensor {
 public:
  SpikeTensor() = default;
  SpikeTensor(int timesteps, int channels, int length);

  int timesteps() const { return timesteps_; }
  int channels() const { return channels_; }
  int length() const { return length_; }
  bool empty() const { return v_.empty(); }

  bool at(int t, int c, int l) const { return v_[index(t, c, l)] != 0; }
  void set(int t, int c, int l, bool fired) { v_[index(t, c, l)] = fired; }
  std::int64_t count() const;

  const std::vector<std::uint8_t>& raw() const { return v_; }
  bool operator==(const SpikeTensor&) const = default;

 private:
  std::size_t index(int t, int c, int l) const {
    return (static_cast<std::size_t>(t) * channels_ + c) * length_ + l;
  }

  int timesteps_ = 0;
  int channels_ = 0;
  int length_ = 0;
  std::vector<std::uint8_t> v_;
};

// Validated, immutable network description. Weighted layers receive their
// tensors in layer order.
class NetworkIR {
 public:
  NetworkIR(std::string name, std::vector<LayerSpec> layers, int timesteps,
            int input_channels, int input_length,
            std::vector<TernaryWeights> weights);

  const std::string& name() const { return name_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  int timesteps() const { return timesteps_; }
  int input_channels() const { return input_channels_; }
  int input_length() const { return input_length_; }
  const std::vector<LayerShape>& shapes() const { return shapes_; }
  const std::vector<TernaryWeights>& weights() const { return weights_; }

  // Throws ConfigError when `layer` has no weights.
  const TernaryWeights& weights_for(std::size_t layer) const;
  std::vector<std::size_t> weighted_layers() const;
  std::vector<std::size_t> cim_layers() const;
  int output_channels() const;
  int output_length() const;

  NetworkIR with_timesteps(int timesteps) const;
  NetworkIR with_weights(std::vector<TernaryWeights> weights) const;

  bool operator==(const NetworkIR&) const = default;

 private:
  std::string name_;
  std::vector<LayerSpec> layers_;
  int timesteps_;
  int input_channels_;
  int input_length_;
  std::vector<TernaryWeights> weights_;
  std::vector<LayerShape> shapes_;
  std::vector<int> weight_slot_;
};

// Parses the JSON config document. A relative `weights_file` is resolved
// against `base_dir`.
NetworkIR parse_network_config(std::string_view text,
                               const std::filesystem::path& base_dir);
NetworkIR load_network_config(const std::filesystem::path& path);

// Serializes `net` as a config document referencing `weights_file`. The
// weights themselves are written separately with write_network_weights.
std::string emit_config(const NetworkIR& net, const std::string& weights_file);
void write_network_weights(const NetworkIR& net,
                           const std::filesystem::path& path);

inline constexpr double kDefaultTernaryThreshold = 0.05;

std::vector<std::int8_t> ternary_quantize(
    std::span<const double> real_weights,
    double threshold_fraction = kDefaultTernaryThreshold);

struct LayerPlacement {
  int layer = 0;
  int row_offset = 0;
  int rows = 0;
  int pair_offset = 0;
  int pairs = 0;
  int page = 0;
};

struct MappingPlan {
  std::vector<LayerPlacement> placements;
  int pages = 0;

  const LayerPlacement& for_layer(int layer) const;
};

// Shelf-packs every CIM layer into the array. A layer whose flattened kernel
// (in_channels x K) exceeds the row count would need partial sums and is
// rejected with MappingError.
MappingPlan validate_cim_mappability(const NetworkIR& net,
                                     const ArrayGeometry& geometry);
MappingPlan validate_cim_mappability(const NetworkIR& net, int array_rows,
                                     int array_cols);

}  // namespace cimsnn

#endif  // CIMSNN_MODEL_IR_HPP_

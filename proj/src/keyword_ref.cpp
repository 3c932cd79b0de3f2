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

#include "cimsnn/keyword_ref.hpp"

#include "cimsnn/random.hpp"

namespace cimsnn {

std::vector<LayerSpec> keyword_ref_layers() {
  using K = LayerKind;
  return {
      {K::kConv1d, 16, 64, 33, 1, 0, 1},
      {K::kMaxPool, 64, 64, 1, 8, 0, 8},
      {K::kConv1d, 64, 96, 3, 1, 1, 1},
      {K::kMaxPool, 96, 96, 1, 2, 0, 2},
      {K::kConv1d, 96, 128, 3, 1, 1, 1},
      {K::kMaxPool, 128, 128, 1, 2, 0, 2},
      {K::kConv1d, 128, 128, 3, 1, 1, 1},
      {K::kMaxPool, 128, 128, 1, 2, 0, 2},
      {K::kConv1d, 128, 128, 3, 1, 1, 1},
      {K::kMaxPool, 128, 128, 1, 2, 0, 2},
      {K::kConv1d, 128, 64, 3, 1, 1, 1},
      {K::kMaxPool, 64, 64, 1, 2, 0, 2},
      {K::kAccumulateHead, 64, 32, 2, 1, 1, 1},
      {K::kAvgPool, 32, 32, 1, 16, 0, 16},
      {K::kClassifier, 32, 12, 1, 1, 0, 1},
  };
}

NetworkIR make_keyword_ref(std::uint64_t seed, double nonzero) {
  const std::vector<LayerSpec> layers = keyword_ref_layers();
  std::vector<TernaryWeights> weights;
  std::uint64_t layer_id = 0;
  for (const LayerSpec& l : layers) {
    if (!l.has_weights()) continue;
    TernaryWeights w(l.out_channels, l.in_channels, l.kernel);
    const std::uint64_t key = hash_key({seed, 0x6b7772ULL, layer_id++});
    for (std::size_t i = 0; i < w.w.size(); ++i) {
      const double u = uniform_open(key, i);
      w.w[i] = u < nonzero / 2 ? 1 : (u < nonzero ? -1 : 0);
    }
    weights.push_back(std::move(w));
  }
  return NetworkIR("keyword_ref", layers, 3, 16, 4000, std::move(weights));
}

SpikeTensor random_input(const NetworkIR& net, double density,
                         std::uint64_t seed) {
  SpikeTensor x(net.timesteps(), net.input_channels(), net.input_length());
  const std::uint64_t key = hash_key({seed, 0x696e707574ULL});
  std::uint64_t i = 0;
  for (int t = 0; t < x.timesteps(); ++t) {
    for (int c = 0; c < x.channels(); ++c) {
      for (int l = 0; l < x.length(); ++l) x.set(t, c, l, uniform_open(key, i++) < density);
    }
  }
  return x;
}

}  // namespace cimsnn

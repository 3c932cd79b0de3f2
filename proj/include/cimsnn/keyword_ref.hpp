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

#ifndef CIMSNN_KEYWORD_REF_HPP_
#define CIMSNN_KEYWORD_REF_HPP_

#include <cstdint>

#include "cimsnn/model_ir.hpp"

namespace cimsnn {

// Seven-block keyword-spotting topology: six conv1d + maxpool blocks, an
// accumulate-head, a global average and a 12-way digital classifier over a
// 16-channel, 4000-position binary input. Channel counts and kernel sizes
// are a reconstruction sized to the reference buffer and latency figures.
std::vector<LayerSpec> keyword_ref_layers();

// Random ternary weights with P(+1) = P(-1) = nonzero / 2.
NetworkIR make_keyword_ref(std::uint64_t seed, double nonzero = 0.2);

// Bernoulli(density) input spikes for `net`.
SpikeTensor random_input(const NetworkIR& net, double density,
                         std::uint64_t seed);

}  // namespace cimsnn

#endif  // CIMSNN_KEYWORD_REF_HPP_

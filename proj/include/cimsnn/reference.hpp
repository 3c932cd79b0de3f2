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

#ifndef CIMSNN_REFERENCE_HPP_
#define CIMSNN_REFERENCE_HPP_

#include <cstdint>
#include <vector>

#include "cimsnn/model_ir.hpp"

namespace cimsnn {

// Pure-integer software SNN used as the oracle for the analog simulator:
// V[t] = V[t-1](1 - S[t-1]) + sum W*IN, S[t] = [V[t] >= threshold], with the
// membrane cleared at the end of every T-step batch.
struct ReferenceRun {
  std::vector<SpikeTensor> layer_outputs;
  // Accumulate-head sums over T (after any avgpool), flattened (c, l).
  std::vector<double> features;
  std::vector<double> scores;
  int predicted = -1;
};

SpikeTensor reference_conv(const LayerSpec& layer, const TernaryWeights& w,
                           const SpikeTensor& input, int threshold = 5);
std::vector<std::int64_t> reference_accumulate(const LayerSpec& layer,
                                               const TernaryWeights& w,
                                               const SpikeTensor& input);
ReferenceRun reference_forward(const NetworkIR& net, const SpikeTensor& input,
                               int threshold = 5);

}  // namespace cimsnn

#endif  // CIMSNN_REFERENCE_HPP_

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

#ifndef CIMSNN_TOY_TASK_HPP_
#define CIMSNN_TOY_TASK_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "cimsnn/model_ir.hpp"

namespace cimsnn {

enum class ToyPattern {
  // A bar of active channels sweeps across channel groups along the position
  // axis. The class encodes direction (up/down) and speed (one group every
  // two positions, or every position).
  kMovingBar,
  // Class k raises the firing rate of groups {k, k + kClasses, ...} at every
  // position; the rest fire at the background rate.
  kGroupRate,
};

std::string_view to_string(ToyPattern p);
ToyPattern toy_pattern_from_string(std::string_view s);

// Binary spike rasters with four classes. Each timestep draws its spikes
// independently.
struct ToyTaskConfig {
  ToyPattern pattern = ToyPattern::kMovingBar;
  int channels = 64;
  int length = 16;
  int groups = 8;
  double p_active = 0.5;
  double p_background = 0.05;
  // Moving bar only: when > 0 the bar is present for this many positions
  // starting at a random position; elsewhere only background fires.
  int event_length = 0;

  static constexpr int kClasses = 4;
  void validate() const;
};

struct ToySample {
  SpikeTensor x;  // three timesteps; truncate for smaller T
  int label = 0;
};

std::vector<ToySample> make_toy_dataset(const ToyTaskConfig& cfg, int n,
                                        std::uint64_t seed);

SpikeTensor truncate_timesteps(const SpikeTensor& x, int timesteps);

}  // namespace cimsnn

#endif  // CIMSNN_TOY_TASK_HPP_

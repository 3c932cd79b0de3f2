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

#ifndef CIMSNN_SCHEDULE_MODE_HPP_
#define CIMSNN_SCHEDULE_MODE_HPP_

#include <string_view>

namespace cimsnn {

// step-by-step: every position of a layer for timestep t before t+1.
// stride-tick: all timesteps of one input block before the next block.
enum class ScheduleMode { kStepByStep, kStrideTick };

std::string_view to_string(ScheduleMode mode);
ScheduleMode schedule_mode_from_string(std::string_view name);

}  // namespace cimsnn

#endif  // CIMSNN_SCHEDULE_MODE_HPP_

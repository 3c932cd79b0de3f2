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

#ifndef CIMSNN_CONFIG_HPP_
#define CIMSNN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "cimsnn/device_model.hpp"
#include "cimsnn/energy.hpp"
#include "cimsnn/geometry.hpp"
#include "cimsnn/model_ir.hpp"
#include "cimsnn/scheduler.hpp"
#include "cimsnn/trainer.hpp"

namespace cimsnn {

struct SaParams {
  double offset_sigma_mv = kDefaultSaOffsetMv;
  double noise_mv_rms = kDefaultSaNoiseMv;
  double mv_per_unit = kDefaultMvPerUnit;
};

// Everything one config document describes besides the network itself.
struct RunConfig {
  std::filesystem::path path;
  NetworkIR net;
  DeviceParams device;
  ArrayGeometry geometry;
  SaParams sa;
  ScheduleConfig schedule;
  EnergyParams energy;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Optional sections may be missing; unknown keys are rejected.
DeviceParams parse_device_params(const std::string& json_text);
TrainConfig parse_train_config(const std::string& json_text);

}  // namespace cimsnn

#endif  // CIMSNN_CONFIG_HPP_

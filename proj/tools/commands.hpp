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

#ifndef CIMSNN_TOOLS_COMMANDS_HPP_
#define CIMSNN_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace cimsnn::cli {

struct CommonOptions {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  // argv after the program name, recorded in the manifest.
  std::vector<std::string> argv;
};

struct InferOptions {
  CommonOptions common;
  double celsius = 25.0;
  std::string temp_sweep;  // "start:stop:step"
  int samples = 4;
  double density = 0.1;
  bool ideal = false;
  std::string mode;  // overrides schedule.mode when set
  bool dump_spikes = false;
  bool trace = false;
  bool pipelined_pooling = false;
  bool energy_json = false;
  bool svg = false;
};

struct ScheduleOptions {
  CommonOptions common;
  std::string mode;
  int line_buffers = 0;  // 0 keeps the config value
  bool pipelined_pooling = false;
  bool trace = false;
  bool svg = false;
};

struct TrainOptions {
  CommonOptions common;
  bool seed_given = false;
  bool zero_variation = false;
};

struct DeviceSweepOptions {
  CommonOptions common;
  std::string temp_sweep = "-20:100:10";
  int seeds = 100;
  bool svg = false;
};

struct MonteCarloOptions {
  CommonOptions common;
  int instances = 8;
  int samples = 4;
  double density = 0.1;
  double celsius = 25.0;
  double sigma = -1.0;  // < 0 keeps the config value
  int threads = 0;      // 0 = hardware concurrency
};

struct ExportOptions {
  CommonOptions common;
  double nonzero = 0.2;
};

// Each command writes its reports into the staged output directory and
// returns normally; failures surface as cimsnn::Error.
void cmd_infer(const InferOptions& o);
void cmd_schedule(const ScheduleOptions& o);
void cmd_train(const TrainOptions& o);
void cmd_device_sweep(const DeviceSweepOptions& o);
void cmd_montecarlo(const MonteCarloOptions& o);
void cmd_export_keyword_ref(const ExportOptions& o);

// "a:b:c" -> a, a+c, ... up to b inclusive. Throws ConfigError.
std::vector<double> parse_sweep(const std::string& spec);

}  // namespace cimsnn::cli

#endif  // CIMSNN_TOOLS_COMMANDS_HPP_

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

#include "cimsnn/toy_task.hpp"

#include <string>

#include "cimsnn/errors.hpp"
#include "cimsnn/random.hpp"

namespace cimsnn {

std::string_view to_string(ToyPattern p) {
  return p == ToyPattern::kGroupRate ? "group_rate" : "moving_bar";
}

ToyPattern toy_pattern_from_string(std::string_view s) {
  if (s == "moving_bar") return ToyPattern::kMovingBar;
  if (s == "group_rate") return ToyPattern::kGroupRate;
  throw ConfigError("toy task: unknown pattern '" + std::string(s) + "'");
}

void ToyTaskConfig::validate() const {
  if (channels < 1 || length < 1 || groups < 1 || channels % groups != 0) {
    throw ConfigError("toy task: channels must be a positive multiple of groups");
  }
  if (event_length < 0 || event_length > length) {
    throw ConfigError("toy task: event_length must be in [0, length]");
  }
  if (!(p_active >= 0 && p_active <= 1 && p_background >= 0 && p_background <= 1)) {
    throw ConfigError("toy task: probabilities must be in [0,1]");
  }
}

std::vector<ToySample> make_toy_dataset(const ToyTaskConfig& cfg, int n,
                                        std::uint64_t seed) {
  cfg.validate();
  const int width = cfg.channels / cfg.groups;
  std::vector<ToySample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t key = hash_key({seed, 0x746f79ULL, static_cast<std::uint64_t>(i)});
    ToySample s;
    s.label = static_cast<int>(uniform_open(key, 0) * ToyTaskConfig::kClasses);
    const int dir = (s.label & 1) ? -1 : 1;
    const int speed = (s.label & 2) ? 2 : 1;
    const int start = static_cast<int>(uniform_open(key, 1) * cfg.groups);
    const int span = cfg.event_length > 0 ? cfg.event_length : cfg.length;
    const int first =
        static_cast<int>(uniform_open(key, 2) * (cfg.length - span + 1));
    s.x = SpikeTensor(3, cfg.channels, cfg.length);
    std::uint64_t draw = 3;
    for (int t = 0; t < 3; ++t) {
      for (int p = 0; p < cfg.length; ++p) {
        const int step = (p * speed) / 2;
        const int g = ((start + dir * step) % cfg.groups + cfg.groups) % cfg.groups;
        for (int c = 0; c < cfg.channels; ++c) {
          const bool on = cfg.pattern == ToyPattern::kGroupRate
                              ? (c / width) % ToyTaskConfig::kClasses == s.label
                              : c / width == g && p >= first && p < first + span;
          const double prob = on ? cfg.p_active : cfg.p_background;
          s.x.set(t, c, p, uniform_open(key, draw++) < prob);
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

SpikeTensor truncate_timesteps(const SpikeTensor& x, int timesteps) {
  if (timesteps < 1 || timesteps > x.timesteps()) {
    throw ShapeError("truncate_timesteps: timesteps out of range");
  }
  SpikeTensor out(timesteps, x.channels(), x.length());
  for (int t = 0; t < timesteps; ++t) {
    for (int c = 0; c < x.channels(); ++c) {
      for (int l = 0; l < x.length(); ++l) out.set(t, c, l, x.at(t, c, l));
    }
  }
  return out;
}

}  // namespace cimsnn

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

#include "cimsnn/device_model.hpp"

#include <cmath>
#include <string>

#include "cimsnn/errors.hpp"
#include "cimsnn/random.hpp"

namespace cimsnn {

double calibrated_i0(double target_current, double v_at_25c, double n,
                     double vth0) {
  return target_current / std::exp((v_at_25c - vth0) / (n * thermal_voltage(25.0)));
}

void DeviceParams::validate() const {
  if (!(i0 > 0)) throw ConfigError("device.I0 must be > 0");
  if (!(n >= 1)) throw ConfigError("device.n must be >= 1");
  if (!(sigma_mismatch >= 0)) throw ConfigError("device.sigma_mismatch must be >= 0");
  if (!(i_unit_target > 0)) throw ConfigError("device.I_unit_target must be > 0");
  if (!(leak_fraction >= 0 && leak_fraction < 1)) {
    throw ConfigError("device.leak_fraction must be in [0,1)");
  }
  if (!(t_min < t_max)) throw ConfigError("device.T_range must be increasing");
  if (!(v_max > 0)) throw ConfigError("device.v_max must be > 0");
  if (!(regulator_tolerance > 0)) {
    throw ConfigError("device.regulator_tolerance must be > 0");
  }
}

double thermal_voltage(double celsius) {
  return kBoltzmannOverCharge * (celsius + kZeroCelsius);
}

double threshold_voltage(double celsius, const DeviceParams& p) {
  return p.vth0 + p.dvth_dt * (celsius - 25.0);
}

double cell_current(double v_supply, double celsius, double gain,
                    const DeviceParams& p) {
  if (gain == 0.0) return 0.0;
  return gain * p.i0 *
         std::exp((v_supply - threshold_voltage(celsius, p)) /
                  (p.n * thermal_voltage(celsius)));
}

RegulatorSolution solve_regulator(double celsius,
                                  std::span<const double> monitor_gains,
                                  const DeviceParams& p) {
  if (monitor_gains.empty()) {
    throw RegulatorError("solve_regulator: no monitor cells");
  }
  if (celsius < p.t_min || celsius > p.t_max) {
    throw RegulatorError("solve_regulator: temperature " + std::to_string(celsius) +
                         " C outside the device range");
  }
  double mean_gain = 0.0;
  for (double g : monitor_gains) mean_gain += g;
  mean_gain /= static_cast<double>(monitor_gains.size());

  auto rel_error = [&](double v) {
    return cell_current(v, celsius, mean_gain, p) / p.i_unit_target - 1.0;
  };
  double lo = 0.0;
  double hi = p.v_max;
  if (!(rel_error(lo) < 0.0 && rel_error(hi) > 0.0)) {
    throw RegulatorError(
        "solve_regulator: target current not bracketed in [0, " +
        std::to_string(p.v_max) + "] V at " + std::to_string(celsius) +
        " C (monitor current " +
        std::to_string(cell_current(lo, celsius, mean_gain, p)) + " .. " +
        std::to_string(cell_current(hi, celsius, mean_gain, p)) + " A)");
  }
  RegulatorSolution sol;
  sol.celsius = celsius;
  constexpr int kMaxIterations = 200;
  double mid = 0.5 * (lo + hi);
  double err = rel_error(mid);
  int it = 1;
  while (std::abs(err) > p.regulator_tolerance && it < kMaxIterations) {
    if (err < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    mid = 0.5 * (lo + hi);
    err = rel_error(mid);
    ++it;
  }
  if (std::abs(err) > p.regulator_tolerance) {
    throw RegulatorError("solve_regulator: no convergence");
  }
  sol.v_r = mid;
  sol.residual_error = std::abs(err);
  sol.iterations = it;
  sol.unit_current = cell_current(mid, celsius, 1.0, p);
  sol.monitor_current = cell_current(mid, celsius, mean_gain, p);
  return sol;
}

MismatchSample::MismatchSample(int rows, int cols, std::uint64_t seed,
                               std::vector<double> gains)
    : rows_(rows), cols_(cols), seed_(seed), gains_(std::move(gains)) {}

MismatchSample sample_mismatch(int rows, int cols, double sigma,
                               std::uint64_t seed) {
  if (sigma < 0) throw ConfigError("sample_mismatch: sigma must be >= 0");
  std::vector<double> g(static_cast<std::size_t>(rows) * cols, 1.0);
  if (sigma > 0) {
    const std::uint64_t key = hash_key({seed, 0x6d69736d61746368ULL});
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = std::exp(sigma * normal_draw(key, i));
    }
  }
  return MismatchSample(rows, cols, seed, std::move(g));
}

double leakage_current(std::int64_t off_cells, double v_supply, double celsius,
                       const DeviceParams& p) {
  if (off_cells <= 0) return 0.0;
  return static_cast<double>(off_cells) * p.leak_fraction *
         cell_current(v_supply, celsius, 1.0, p);
}

}  // namespace cimsnn

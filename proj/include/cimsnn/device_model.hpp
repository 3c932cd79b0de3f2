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

#ifndef CIMSNN_DEVICE_MODEL_HPP_
#define CIMSNN_DEVICE_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace cimsnn {

inline constexpr double kBoltzmannOverCharge = 8.617333262e-5;  // V/K
inline constexpr double kZeroCelsius = 273.15;

// Scale current that puts the regulated supply at `v_at_25c` when a unit
// cell must deliver `target_current` at 25 C.
double calibrated_i0(double target_current, double v_at_25c, double n,
                     double vth0);

struct DeviceParams {
  double i0 = calibrated_i0(200e-9, 0.29, 1.3, 0.45);  // A
  double n = 1.3;
  double vth0 = 0.45;        // V at 25 C
  double dvth_dt = -1e-3;    // V/C
  double sigma_mismatch = 0.1;
  double t_min = -20.0;      // C
  double t_max = 100.0;      // C
  double i_unit_target = 200e-9;  // A
  double leak_fraction = 1e-4;
  double v_max = 0.9;        // V, nominal supply and bisection upper bound
  double regulator_tolerance = 1e-5;

  // Throws ConfigError on a violated invariant.
  void validate() const;
};

double thermal_voltage(double celsius);
double threshold_voltage(double celsius, const DeviceParams& p);

// Weak-inversion drain current of one cell.
double cell_current(double v_supply, double celsius, double gain,
                    const DeviceParams& p);

struct RegulatorSolution {
  double v_r = 0.0;
  double residual_error = 0.0;
  int iterations = 0;
  double celsius = 0.0;
  // Current of a gain-1 cell at v_r.
  double unit_current = 0.0;
  // Mean monitor-cell current at v_r.
  double monitor_current = 0.0;
};

// Bisection on [0, v_max] for the supply at which the mean monitor-cell
// current equals i_unit_target. Throws RegulatorError if the target is not
// bracketed.
RegulatorSolution solve_regulator(double celsius,
                                  std::span<const double> monitor_gains,
                                  const DeviceParams& p);

class MismatchSample {
 public:
  MismatchSample() = default;
  MismatchSample(int rows, int cols, std::uint64_t seed,
                 std::vector<double> gains);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint64_t seed() const { return seed_; }
  double gain(int r, int c) const {
    return gains_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const std::vector<double>& gains() const { return gains_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> gains_;
};

// Independent lognormal(0, sigma) gains, a pure function of (seed, r, c).
MismatchSample sample_mismatch(int rows, int cols, double sigma,
                               std::uint64_t seed);

double leakage_current(std::int64_t off_cells, double v_supply, double celsius,
                       const DeviceParams& p);

}  // namespace cimsnn

#endif  // CIMSNN_DEVICE_MODEL_HPP_

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

#ifndef CIMSNN_TRAINER_HPP_
#define CIMSNN_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cimsnn/cim_array.hpp"
#include "cimsnn/model_ir.hpp"
#include "cimsnn/neuron_core.hpp"
#include "cimsnn/toy_task.hpp"

namespace cimsnn {

// Forward: hard threshold [v >= threshold]. Backward: rectangular window of
// height 1/(2*slope) over |v - threshold| < slope.
double surrogate_spike_grad(double v, double threshold, double slope);
// Hard-sigmoid whose derivative is exactly the rectangular surrogate.
double relaxed_spike(double v, double threshold, double slope);

struct VariationProfile {
  double sigma_mismatch = 0.1;
  double offset_sigma_mv = kDefaultSaOffsetMv;
  double noise_mv_rms = kDefaultSaNoiseMv;
  double mv_per_unit = kDefaultMvPerUnit;
  double leak_fraction = 1e-4;

  static VariationProfile none();
  void validate() const;
};

// conv1d blocks (each followed by maxpool when pool > 1), then a class
// layer and a global average. The class layer is an accumulate-head, or
// with spiking_readout a conv1d whose spike counts are the scores.
struct ToyNetSpec {
  int input_channels = 64;
  int input_length = 16;
  std::vector<int> hidden = {16};
  int kernel = 3;
  int pool = 2;
  int classes = ToyTaskConfig::kClasses;
  bool spiking_readout = false;

  std::vector<LayerSpec> layers() const;
};

enum class TrainStage { kInitialized, kPretrained, kQuantized, kPruned, kFinetuned };

std::string_view to_string(TrainStage stage);

class SnnModel {
 public:
  SnnModel(ToyNetSpec spec, int timesteps, std::uint64_t seed);

  const ToyNetSpec& spec() const { return spec_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  // Indices into layers() of the weighted layers, in order.
  const std::vector<int>& weighted() const { return weighted_; }
  int timesteps() const { return timesteps_; }
  void set_timesteps(int timesteps);
  TrainStage stage() const { return stage_; }
  // Moves forward through the training flow; throws PhaseError on any
  // attempt to skip quantization or go backwards.
  void advance(TrainStage next);

  // Full-precision shadow weights, laid out like TernaryWeights (o, c, k).
  std::vector<std::vector<double>>& latent() { return latent_; }
  const std::vector<std::vector<double>>& latent() const { return latent_; }

  std::vector<TernaryWeights> ternary(double threshold_fraction) const;
  NetworkIR to_ir(double threshold_fraction = kDefaultTernaryThreshold) const;

 private:
  ToyNetSpec spec_;
  std::vector<LayerSpec> layers_;
  std::vector<int> weighted_;
  int timesteps_;
  TrainStage stage_ = TrainStage::kInitialized;
  std::vector<std::vector<double>> latent_;
};

// Analog plane of one sampled chip as the trainer sees it.
struct HardwareInstance {
  std::vector<std::vector<double>> weight;     // per weighted layer, (o, c, k)
  std::vector<std::vector<double>> bias;       // units per output
  std::vector<std::vector<double>> threshold;  // units per output
  std::vector<std::vector<double>> offset;     // units per output
  double noise_sigma = 0.0;                    // units
  std::uint64_t seed = 0;
};

// Everything a hardware run needs: the programmed array and SA draws of one
// chip. Both the trainer and neuron-core evaluation derive from this.
struct ChipSample {
  NetworkIR ir;
  MappingPlan plan;
  CimArray array;
  SaNonidealities sa;
};

ChipSample sample_chip(const SnnModel& model, const VariationProfile& profile,
                       const ArrayGeometry& geometry, std::uint64_t seed,
                       double ternary_threshold = kDefaultTernaryThreshold);
HardwareInstance hardware_view(const SnnModel& model, const ChipSample& chip);

enum class WeightMode { kLatent, kBlend, kTernary };

struct ForwardOptions {
  bool relaxed = false;
  double slope = 1.0;
  double logit_scale = 0.5;
  WeightMode weights = WeightMode::kLatent;
  double alpha = 1.0;  // ternary share in kBlend
  double ternary_threshold = kDefaultTernaryThreshold;
  const HardwareInstance* hardware = nullptr;
  std::uint64_t noise_key = 0;
};

struct ForwardResult {
  double loss = 0.0;
  std::vector<double> logits;
  int predicted = -1;
  // Spikes of every conv1d layer (hard mode only), indexed like layers().
  std::vector<SpikeTensor> spikes;
};

// Softmax cross-entropy of one sample. When `grads` is non-null, dL/dW with
// respect to the weights actually used is accumulated into it (latent
// layout); the straight-through estimator hands it to the shadow weights.
ForwardResult loss_and_grad(const SnnModel& model, const SpikeTensor& x,
                            int label, const ForwardOptions& opts,
                            std::vector<std::vector<double>>* grads);

struct AccuracyTriple {
  double ideal_acc = 0.0;
  double degraded_acc = 0.0;
  double recovered_acc = 0.0;
};

struct TrainConfig {
  ToyTaskConfig task;
  ToyNetSpec net;
  int train_samples = 512;
  int test_samples = 256;
  int batch = 32;
  int pretrain_epochs = 20;
  int quantize_epochs = 10;
  int prune_epochs = 6;
  int finetune_epochs = 30;
  double lr = 0.03;
  double lr_decay = 0.95;
  double finetune_lr = 0.02;
  double surrogate_slope = 1.0;
  double logit_scale = 0.5;
  double ternary_threshold = kDefaultTernaryThreshold;
  int from_timesteps = 3;
  int target_timesteps = 3;
  VariationProfile variation;
  int n_mc = 16;
  ArrayGeometry geometry{256, 128, 32, 4, 10};
  std::uint64_t seed = 1;

  void validate() const;
};

void pretrain(SnnModel& model, const std::vector<ToySample>& train,
              const TrainConfig& cfg);
// Blends latent and ternary weights with a ternary share rising to 1.
void progressive_quantize(SnnModel& model, const std::vector<ToySample>& train,
                          const TrainConfig& cfg);
// Retrains at every T from from_T - 1 down to to_T.
SnnModel progressive_timestep_prune(SnnModel model, int from_T, int to_T,
                                    const std::vector<ToySample>& train,
                                    const TrainConfig& cfg);
// Ideal and no-adjustment accuracies, fine-tuning with a fresh chip per
// batch, then the recovered accuracy on the same evaluation chips.
AccuracyTriple variation_finetune(SnnModel& model,
                                  const VariationProfile& profile, int n_mc,
                                  const std::vector<ToySample>& train,
                                  const std::vector<ToySample>& test,
                                  const TrainConfig& cfg);

// Accuracy of the ternary model run through cim-array and neuron-core. With
// a profile, the mean over n_mc chips whose seeds derive from `seed`.
double evaluate_ideal(const SnnModel& model, const std::vector<ToySample>& test,
                      const TrainConfig& cfg);
double evaluate_on_chips(const SnnModel& model,
                         const std::vector<ToySample>& test,
                         const VariationProfile& profile, int n_mc,
                         const TrainConfig& cfg);

struct TrainReport {
  AccuracyTriple triple;
  std::vector<std::pair<std::string, double>> stage_accuracy;
  int final_timesteps = 0;
};

TrainReport run_training(const TrainConfig& cfg, SnnModel* final_model = nullptr);

struct GradientCheck {
  int parameters = 0;
  int passed = 0;
  double worst_relative_error = 0.0;
  double pass_fraction() const {
    return parameters == 0 ? 0.0 : static_cast<double>(passed) / parameters;
  }
};

// Central differences of the relaxed-network loss against backprop.
GradientCheck gradient_check(const SnnModel& model,
                             const std::vector<ToySample>& samples,
                             const ForwardOptions& opts, double eps,
                             double tolerance);

}  // namespace cimsnn

#endif  // CIMSNN_TRAINER_HPP_

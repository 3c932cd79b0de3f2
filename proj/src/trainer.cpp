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

#include "cimsnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "cimsnn/errors.hpp"
#include "cimsnn/random.hpp"

namespace cimsnn {

namespace {

// Dense activations indexed (t, c, l).
struct Buf {
  int T = 0;
  int C = 0;
  int L = 0;
  std::vector<double> v;

  Buf() = default;
  Buf(int t, int c, int l) : T(t), C(c), L(l), v(static_cast<std::size_t>(t) * c * l, 0.0) {}
  double& at(int t, int c, int l) { return v[(static_cast<std::size_t>(t) * C + c) * L + l]; }
  double at(int t, int c, int l) const { return v[(static_cast<std::size_t>(t) * C + c) * L + l]; }
};

struct LayerCache {
  Buf in;
  Buf u;
  Buf V;
  Buf z;
  Buf S;
  std::vector<int> arg;
};

// Weights and per-output analog terms of every weighted layer.
struct PlaneView {
  std::vector<std::vector<double>> weight;
  const std::vector<std::vector<double>>* bias = nullptr;
  const std::vector<std::vector<double>>* threshold = nullptr;
  const std::vector<std::vector<double>>* offset = nullptr;
  double noise_sigma = 0.0;
};

int conv_len(const LayerSpec& l, int in_length) {
  return (in_length + 2 * l.padding - l.kernel) / l.stride + 1;
}

PlaneView plane_for(const SnnModel& m, const ForwardOptions& o) {
  PlaneView pv;
  if (o.hardware != nullptr) {
    pv.weight = o.hardware->weight;
    pv.bias = &o.hardware->bias;
    pv.threshold = &o.hardware->threshold;
    pv.offset = &o.hardware->offset;
    pv.noise_sigma = o.hardware->noise_sigma;
    return pv;
  }
  pv.weight = m.latent();
  if (o.weights == WeightMode::kLatent) return pv;
  for (auto& w : pv.weight) {
    const std::vector<std::int8_t> q = ternary_quantize(w, o.ternary_threshold);
    const double a = o.weights == WeightMode::kTernary ? 1.0 : o.alpha;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - a) * w[i] + a * q[i];
  }
  return pv;
}

void conv_forward(const LayerSpec& l, const std::vector<double>& w,
                  const std::vector<double>* bias, const Buf& in, Buf* u) {
  const int P = conv_len(l, in.L);
  *u = Buf(in.T, l.out_channels, P);
  for (int t = 0; t < in.T; ++t) {
    for (int o = 0; o < l.out_channels; ++o) {
      const double b = bias != nullptr ? (*bias)[o] : 0.0;
      const double* wo = &w[static_cast<std::size_t>(o) * l.in_channels * l.kernel];
      for (int p = 0; p < P; ++p) {
        double acc = b;
        for (int c = 0; c < l.in_channels; ++c) {
          const double* wc = wo + static_cast<std::size_t>(c) * l.kernel;
          for (int k = 0; k < l.kernel; ++k) {
            const int pos = p * l.stride + k - l.padding;
            if (pos < 0 || pos >= in.L) continue;
            acc += wc[k] * in.at(t, c, pos);
          }
        }
        u->at(t, o, p) = acc;
      }
    }
  }
}

void conv_backward(const LayerSpec& l, const std::vector<double>& w,
                   const Buf& in, const Buf& gu, std::vector<double>* gw,
                   Buf* gin) {
  for (int t = 0; t < gu.T; ++t) {
    for (int o = 0; o < gu.C; ++o) {
      const std::size_t wo = static_cast<std::size_t>(o) * l.in_channels * l.kernel;
      for (int p = 0; p < gu.L; ++p) {
        const double g = gu.at(t, o, p);
        if (g == 0.0) continue;
        for (int c = 0; c < l.in_channels; ++c) {
          for (int k = 0; k < l.kernel; ++k) {
            const int pos = p * l.stride + k - l.padding;
            if (pos < 0 || pos >= in.L) continue;
            const std::size_t wi = wo + static_cast<std::size_t>(c) * l.kernel + k;
            (*gw)[wi] += g * in.at(t, c, pos);
            if (gin != nullptr) gin->at(t, c, pos) += g * w[wi];
          }
        }
      }
    }
  }
}

ForwardResult run_engine(const SnnModel& m, const PlaneView& pv,
                         const SpikeTensor& x, int label,
                         const ForwardOptions& o,
                         std::vector<std::vector<double>>* grads) {
  const int T = m.timesteps();
  if (x.timesteps() < T || x.channels() != m.spec().input_channels ||
      x.length() != m.spec().input_length) {
    throw ShapeError("trainer: sample shape does not match the model");
  }
  const auto& layers = m.layers();
  std::vector<LayerCache> cache(layers.size());
  ForwardResult res;
  res.spikes.resize(layers.size());

  Buf cur(T, x.channels(), x.length());
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < x.channels(); ++c) {
      for (int l = 0; l < x.length(); ++l) cur.at(t, c, l) = x.at(t, c, l);
    }
  }

  int wi = 0;
  std::vector<int> slot(layers.size(), -1);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    LayerCache& c = cache[i];
    c.in = cur;
    switch (l.kind) {
      case LayerKind::kConv1d: {
        slot[i] = wi;
        conv_forward(l, pv.weight[wi], pv.bias ? &(*pv.bias)[wi] : nullptr, cur, &c.u);
        const int P = c.u.L;
        c.V = Buf(T, l.out_channels, P);
        c.z = Buf(T, l.out_channels, P);
        c.S = Buf(T, l.out_channels, P);
        for (int oc = 0; oc < l.out_channels; ++oc) {
          const double theta = pv.threshold ? (*pv.threshold)[wi][oc] : kThresholdUnits;
          const double off = pv.offset ? (*pv.offset)[wi][oc] : 0.0;
          for (int p = 0; p < P; ++p) {
            const std::uint64_t key =
                hash_key({o.noise_key, i, static_cast<std::uint64_t>(oc),
                          static_cast<std::uint64_t>(p)});
            double v = 0.0;
            double s_prev = 0.0;
            for (int t = 0; t < T; ++t) {
              const double noise =
                  pv.noise_sigma > 0.0 ? pv.noise_sigma * normal_draw(key, t) : 0.0;
              double s;
              if (o.relaxed) {
                v = v * (1.0 - s_prev) + c.u.at(t, oc, p);
                s = relaxed_spike(v + off + noise, theta, o.slope);
              } else {
                v = integrate_membrane(v, s_prev != 0.0, c.u.at(t, oc, p));
                s = spike_decision(v, theta, off, noise) ? 1.0 : 0.0;
              }
              c.V.at(t, oc, p) = v;
              c.z.at(t, oc, p) = v + off + noise - theta;
              c.S.at(t, oc, p) = s;
              s_prev = s;
            }
          }
        }
        if (!o.relaxed) {
          SpikeTensor st(T, l.out_channels, P);
          for (std::size_t j = 0; j < c.S.v.size(); ++j) {
            if (c.S.v[j] != 0.0) {
              const int t = static_cast<int>(j / (static_cast<std::size_t>(l.out_channels) * P));
              const int rem = static_cast<int>(j % (static_cast<std::size_t>(l.out_channels) * P));
              st.set(t, rem / P, rem % P, true);
            }
          }
          res.spikes[i] = std::move(st);
        }
        cur = c.S;
        ++wi;
        break;
      }
      case LayerKind::kAccumulateHead: {
        slot[i] = wi;
        conv_forward(l, pv.weight[wi], pv.bias ? &(*pv.bias)[wi] : nullptr, cur, &c.u);
        Buf a(1, l.out_channels, c.u.L);
        for (int t = 0; t < T; ++t) {
          for (int oc = 0; oc < l.out_channels; ++oc) {
            for (int p = 0; p < c.u.L; ++p) a.at(0, oc, p) += c.u.at(t, oc, p);
          }
        }
        cur = a;
        ++wi;
        break;
      }
      case LayerKind::kMaxPool: {
        Buf out(cur.T, cur.C, cur.L / l.pool);
        c.arg.assign(out.v.size(), 0);
        for (int t = 0; t < out.T; ++t) {
          for (int ch = 0; ch < out.C; ++ch) {
            for (int p = 0; p < out.L; ++p) {
              int best = p * l.pool;
              for (int j = 1; j < l.pool; ++j) {
                if (cur.at(t, ch, p * l.pool + j) > cur.at(t, ch, best)) best = p * l.pool + j;
              }
              out.at(t, ch, p) = cur.at(t, ch, best);
              c.arg[(static_cast<std::size_t>(t) * out.C + ch) * out.L + p] = best;
            }
          }
        }
        cur = out;
        break;
      }
      case LayerKind::kAvgPool: {
        Buf out(1, cur.C, cur.L / l.pool);
        for (int ch = 0; ch < out.C; ++ch) {
          for (int p = 0; p < out.L; ++p) {
            double s = 0.0;
            for (int t = 0; t < cur.T; ++t) {
              for (int j = 0; j < l.pool; ++j) s += cur.at(t, ch, p * l.pool + j);
            }
            out.at(0, ch, p) = s / l.pool;
          }
        }
        cur = out;
        break;
      }
      case LayerKind::kClassifier:
        throw ConfigError("trainer: classifier layers are not supported");
    }
  }

  res.logits.resize(cur.v.size());
  double zmax = -1e300;
  for (std::size_t k = 0; k < cur.v.size(); ++k) {
    res.logits[k] = o.logit_scale * cur.v[k];
    zmax = std::max(zmax, res.logits[k]);
  }
  double denom = 0.0;
  for (double z : res.logits) denom += std::exp(z - zmax);
  res.loss = -(res.logits[label] - zmax - std::log(denom));
  res.predicted = argmax(res.logits);
  if (grads == nullptr) return res;

  Buf g(cur.T, cur.C, cur.L);
  for (std::size_t k = 0; k < g.v.size(); ++k) {
    const double p = std::exp(res.logits[k] - zmax) / denom;
    g.v[k] = o.logit_scale * (p - (static_cast<int>(k) == label ? 1.0 : 0.0));
  }
  for (std::size_t ii = layers.size(); ii-- > 0;) {
    const LayerSpec& l = layers[ii];
    LayerCache& c = cache[ii];
    Buf gin(c.in.T, c.in.C, c.in.L);
    const bool need_gin = ii > 0;
    switch (l.kind) {
      case LayerKind::kConv1d: {
        Buf gu(T, l.out_channels, c.u.L);
        for (int oc = 0; oc < l.out_channels; ++oc) {
          for (int p = 0; p < c.u.L; ++p) {
            double gv_next = 0.0;
            for (int t = T - 1; t >= 0; --t) {
              double gs = g.at(t, oc, p);
              double gv = 0.0;
              if (t < T - 1) {
                gs -= gv_next * c.V.at(t, oc, p);
                gv = gv_next * (1.0 - c.S.at(t, oc, p));
              }
              gv += gs * surrogate_spike_grad(c.z.at(t, oc, p), 0.0, o.slope);
              gu.at(t, oc, p) = gv;
              gv_next = gv;
            }
          }
        }
        conv_backward(l, pv.weight[slot[ii]], c.in, gu, &(*grads)[slot[ii]],
                      need_gin ? &gin : nullptr);
        break;
      }
      case LayerKind::kAccumulateHead: {
        Buf gu(T, l.out_channels, c.u.L);
        for (int t = 0; t < T; ++t) {
          for (int oc = 0; oc < l.out_channels; ++oc) {
            for (int p = 0; p < c.u.L; ++p) gu.at(t, oc, p) = g.at(0, oc, p);
          }
        }
        conv_backward(l, pv.weight[slot[ii]], c.in, gu, &(*grads)[slot[ii]],
                      need_gin ? &gin : nullptr);
        break;
      }
      case LayerKind::kMaxPool:
        for (int t = 0; t < g.T; ++t) {
          for (int ch = 0; ch < g.C; ++ch) {
            for (int p = 0; p < g.L; ++p) {
              const int src = c.arg[(static_cast<std::size_t>(t) * g.C + ch) * g.L + p];
              gin.at(t, ch, src) += g.at(t, ch, p);
            }
          }
        }
        break;
      case LayerKind::kAvgPool:
        for (int t = 0; t < gin.T; ++t) {
          for (int ch = 0; ch < g.C; ++ch) {
            for (int p = 0; p < g.L; ++p) {
              for (int j = 0; j < l.pool; ++j) {
                gin.at(t, ch, p * l.pool + j) += g.at(0, ch, p) / l.pool;
              }
            }
          }
        }
        break;
      case LayerKind::kClassifier:
        break;
    }
    g = std::move(gin);
  }
  return res;
}

struct Adam {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int step = 0;

  explicit Adam(const std::vector<std::vector<double>>& shape) {
    for (const auto& w : shape) {
      m.emplace_back(w.size(), 0.0);
      v.emplace_back(w.size(), 0.0);
    }
  }

  void update(std::vector<std::vector<double>>* params,
              const std::vector<std::vector<double>>& g, double lr) {
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    ++step;
    const double c1 = 1.0 - std::pow(b1, step);
    const double c2 = 1.0 - std::pow(b2, step);
    for (std::size_t l = 0; l < g.size(); ++l) {
      auto& w = (*params)[l];
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[l][i] = b1 * m[l][i] + (1 - b1) * g[l][i];
        v[l][i] = b2 * v[l][i] + (1 - b2) * g[l][i] * g[l][i];
        w[i] -= lr * (m[l][i] / c1) / (std::sqrt(v[l][i] / c2) + eps);
        w[i] = std::clamp(w[i], -1.0, 1.0);
      }
    }
  }
};

std::vector<int> permutation(int n, std::uint64_t key) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_open(key, i) * (i + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

enum : std::uint64_t {
  kStreamPretrain = 1,
  kStreamQuantize = 2,
  kStreamPrune = 3,
  kStreamFinetune = 4,
  kStreamEvalChip = 5,
  kStreamTrainSet = 6,
  kStreamTestSet = 7,
  kStreamInit = 8,
};

// Runs `epochs` of minibatch Adam. `mode_for` picks the weight mode per
// epoch; with a profile every batch sees a freshly sampled chip.
template <typename ModeFn>
void train_epochs(SnnModel& model, const std::vector<ToySample>& data,
                  const TrainConfig& cfg, int epochs, double lr0,
                  std::uint64_t stream, ModeFn mode_for,
                  const VariationProfile* profile) {
  if (data.empty() || epochs <= 0) return;
  Adam adam(model.latent());
  const int n = static_cast<int>(data.size());
  std::uint64_t batch_counter = 0;
  for (int e = 0; e < epochs; ++e) {
    const double lr = lr0 * std::pow(cfg.lr_decay, e);
    const std::vector<int> order =
        permutation(n, hash_key({cfg.seed, stream, static_cast<std::uint64_t>(e),
                                 static_cast<std::uint64_t>(model.timesteps())}));
    for (int b0 = 0; b0 < n; b0 += cfg.batch) {
      ForwardOptions opts;
      opts.slope = cfg.surrogate_slope;
      opts.logit_scale = cfg.logit_scale;
      opts.ternary_threshold = cfg.ternary_threshold;
      mode_for(e, &opts);
      HardwareInstance hw;
      const std::uint64_t batch_key =
          hash_key({cfg.seed, stream, static_cast<std::uint64_t>(model.timesteps()),
                    batch_counter++});
      if (profile != nullptr) {
        const ChipSample chip =
            sample_chip(model, *profile, cfg.geometry, batch_key, cfg.ternary_threshold);
        hw = hardware_view(model, chip);
        opts.hardware = &hw;
      }
      const PlaneView pv = plane_for(model, opts);
      std::vector<std::vector<double>> grads;
      for (const auto& w : model.latent()) grads.emplace_back(w.size(), 0.0);
      const int b1 = std::min(n, b0 + cfg.batch);
      for (int j = b0; j < b1; ++j) {
        const ToySample& s = data[order[j]];
        opts.noise_key = hash_key({batch_key, static_cast<std::uint64_t>(j)});
        run_engine(model, pv, s.x, s.label, opts, &grads);
      }
      const double scale = 1.0 / (b1 - b0);
      for (auto& g : grads) {
        for (double& v : g) v *= scale;
      }
      adam.update(&model.latent(), grads, lr);
    }
  }
}

}  // namespace

double surrogate_spike_grad(double v, double threshold, double slope) {
  if (!(slope > 0)) throw ConfigError("surrogate slope must be > 0");
  return std::abs(v - threshold) < slope ? 1.0 / (2.0 * slope) : 0.0;
}

double relaxed_spike(double v, double threshold, double slope) {
  return std::clamp((v - threshold) / (2.0 * slope) + 0.5, 0.0, 1.0);
}

VariationProfile VariationProfile::none() {
  VariationProfile p;
  p.sigma_mismatch = 0.0;
  p.offset_sigma_mv = 0.0;
  p.noise_mv_rms = 0.0;
  p.leak_fraction = 0.0;
  return p;
}

void VariationProfile::validate() const {
  if (sigma_mismatch < 0 || offset_sigma_mv < 0 || noise_mv_rms < 0 ||
      leak_fraction < 0 || leak_fraction >= 1 || !(mv_per_unit > 0)) {
    throw ConfigError("variation profile: sigmas >= 0, leak in [0,1), mV_per_unit > 0");
  }
}

std::vector<LayerSpec> ToyNetSpec::layers() const {
  std::vector<LayerSpec> out;
  int c = input_channels;
  int len = input_length;
  const int pad = (kernel - 1) / 2;
  for (int h : hidden) {
    LayerSpec conv{LayerKind::kConv1d, c, h, kernel, 1, pad, 1};
    out.push_back(conv);
    len = conv_len(conv, len);
    c = h;
    if (pool > 1 && len / pool >= 1) {
      out.push_back({LayerKind::kMaxPool, c, c, 1, pool, 0, pool});
      len /= pool;
    }
  }
  LayerSpec head{spiking_readout ? LayerKind::kConv1d : LayerKind::kAccumulateHead,
                 c, classes, kernel, 1, pad, 1};
  out.push_back(head);
  len = conv_len(head, len);
  out.push_back({LayerKind::kAvgPool, classes, classes, 1, len, 0, len});
  return out;
}

std::string_view to_string(TrainStage stage) {
  switch (stage) {
    case TrainStage::kInitialized:
      return "initialized";
    case TrainStage::kPretrained:
      return "pretrained";
    case TrainStage::kQuantized:
      return "quantized";
    case TrainStage::kPruned:
      return "pruned";
    case TrainStage::kFinetuned:
      return "finetuned";
  }
  return "unknown";
}

SnnModel::SnnModel(ToyNetSpec spec, int timesteps, std::uint64_t seed)
    : spec_(std::move(spec)), layers_(spec_.layers()), timesteps_(timesteps) {
  set_timesteps(timesteps);
  std::uint64_t idx = 0;
  const std::uint64_t key = hash_key({seed, kStreamInit});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (!l.has_weights()) continue;
    weighted_.push_back(static_cast<int>(i));
    std::vector<double> w(static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel);
    for (double& v : w) v = 2.0 * uniform_open(key, idx++) - 1.0;
    latent_.push_back(std::move(w));
  }
}

void SnnModel::set_timesteps(int timesteps) {
  if (timesteps < 1 || timesteps > 3) throw ConfigError("timesteps out of range (1..3)");
  timesteps_ = timesteps;
}

void SnnModel::advance(TrainStage next) {
  const int from = static_cast<int>(stage_);
  const int to = static_cast<int>(next);
  const bool skips_quantization =
      stage_ < TrainStage::kQuantized && next > TrainStage::kQuantized;
  if (to < from || skips_quantization || (to > from + 1 && next != TrainStage::kFinetuned)) {
    throw PhaseError("stage order violation: cannot go from " +
                     std::string(to_string(stage_)) + " to " +
                     std::string(to_string(next)));
  }
  stage_ = next;
}

std::vector<TernaryWeights> SnnModel::ternary(double threshold_fraction) const {
  std::vector<TernaryWeights> out;
  for (std::size_t j = 0; j < weighted_.size(); ++j) {
    const LayerSpec& l = layers_[weighted_[j]];
    TernaryWeights w(l.out_channels, l.in_channels, l.kernel);
    w.w = ternary_quantize(latent_[j], threshold_fraction);
    out.push_back(std::move(w));
  }
  return out;
}

NetworkIR SnnModel::to_ir(double threshold_fraction) const {
  return NetworkIR("toy", layers_, timesteps_, spec_.input_channels,
                   spec_.input_length, ternary(threshold_fraction));
}

ChipSample sample_chip(const SnnModel& model, const VariationProfile& profile,
                       const ArrayGeometry& geometry, std::uint64_t seed,
                       double ternary_threshold) {
  profile.validate();
  NetworkIR ir = model.to_ir(ternary_threshold);
  MappingPlan plan = validate_cim_mappability(ir, geometry);
  if (plan.pages > 1) {
    throw MappingError("toy model must fit on one array page");
  }
  DeviceParams dp;
  dp.sigma_mismatch = profile.sigma_mismatch;
  dp.leak_fraction = profile.leak_fraction;
  CimArray array(geometry, dp, hash_key({seed, 0x63686970ULL}));
  array.program(plan, ir, 0);
  array.enter_cim_mode(25.0);
  SaNonidealities sa = sample_sa_nonidealities(
      geometry.neurons(), profile.offset_sigma_mv, profile.noise_mv_rms,
      profile.mv_per_unit, hash_key({seed, 0x7361ULL}));
  return ChipSample{std::move(ir), std::move(plan), std::move(array), std::move(sa)};
}

HardwareInstance hardware_view(const SnnModel& model, const ChipSample& chip) {
  HardwareInstance hw;
  hw.seed = chip.sa.seed;
  const ArrayGeometry& g = chip.array.geometry();
  const double target = chip.array.params().i_unit_target;
  double scale_sum = 0.0;
  int scale_n = 0;
  for (int li : model.weighted()) {
    const LayerSpec& l = model.layers()[li];
    const LayerPlacement& pl = chip.plan.for_layer(li);
    const EffectiveLayer e = chip.array.effective_layer(pl);
    std::vector<double> w(static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel);
    std::vector<double> off(l.out_channels);
    for (int o = 0; o < l.out_channels; ++o) {
      for (int k = 0; k < l.kernel; ++k) {
        for (int c = 0; c < l.in_channels; ++c) {
          w[(static_cast<std::size_t>(o) * l.in_channels + c) * l.kernel + k] =
              e.weight[static_cast<std::size_t>(o) * e.rows + k * l.in_channels + c];
        }
      }
      const int pair = pl.pair_offset + o;
      const double scale =
          chip.array.regulator(g.pair(pair).subbank).unit_current / target;
      off[o] = chip.sa.offset_units(g.neuron_site(pair), scale);
      scale_sum += scale;
      ++scale_n;
    }
    hw.weight.push_back(std::move(w));
    hw.bias.push_back(e.bias);
    hw.threshold.push_back(e.threshold);
    hw.offset.push_back(std::move(off));
  }
  hw.noise_sigma = chip.sa.noise_units(scale_n > 0 ? scale_sum / scale_n : 1.0);
  return hw;
}

ForwardResult loss_and_grad(const SnnModel& model, const SpikeTensor& x,
                            int label, const ForwardOptions& opts,
                            std::vector<std::vector<double>>* grads) {
  if (label < 0 || label >= model.spec().classes) {
    throw ShapeError("trainer: label out of range");
  }
  if (grads != nullptr && grads->size() != model.latent().size()) {
    grads->clear();
    for (const auto& w : model.latent()) grads->emplace_back(w.size(), 0.0);
  }
  return run_engine(model, plane_for(model, opts), x, label, opts, grads);
}

void TrainConfig::validate() const {
  task.validate();
  variation.validate();
  if (train_samples < 1 || test_samples < 1 || batch < 1) {
    throw ConfigError("train: sample counts and batch must be >= 1");
  }
  if (pretrain_epochs < 0 || quantize_epochs < 1 || prune_epochs < 0 ||
      finetune_epochs < 0) {
    throw ConfigError("train: epoch counts must be >= 0 (quantize >= 1)");
  }
  if (!(lr > 0 && finetune_lr > 0 && lr_decay > 0 && surrogate_slope > 0 &&
        logit_scale > 0)) {
    throw ConfigError("train: learning rates, slope and logit scale must be > 0");
  }
  if (from_timesteps < 1 || from_timesteps > 3 || target_timesteps < 1 ||
      target_timesteps > from_timesteps) {
    throw ConfigError("train: need 1 <= target_timesteps <= from_timesteps <= 3");
  }
  if (n_mc < 1) throw ConfigError("train: n_mc must be >= 1");
  if (net.input_channels != task.channels || net.input_length != task.length ||
      net.classes != ToyTaskConfig::kClasses) {
    throw ConfigError("train: network input does not match the toy task");
  }
}

void pretrain(SnnModel& model, const std::vector<ToySample>& train,
              const TrainConfig& cfg) {
  model.advance(TrainStage::kPretrained);
  train_epochs(model, train, cfg, cfg.pretrain_epochs, cfg.lr, kStreamPretrain,
               [](int, ForwardOptions* o) { o->weights = WeightMode::kLatent; }, nullptr);
}

void progressive_quantize(SnnModel& model, const std::vector<ToySample>& train,
                          const TrainConfig& cfg) {
  model.advance(TrainStage::kQuantized);
  const int epochs = cfg.quantize_epochs;
  train_epochs(model, train, cfg, epochs, cfg.lr, kStreamQuantize,
               [epochs](int e, ForwardOptions* o) {
                 o->weights = WeightMode::kBlend;
                 o->alpha = static_cast<double>(e + 1) / epochs;
               },
               nullptr);
}

SnnModel progressive_timestep_prune(SnnModel model, int from_T, int to_T,
                                    const std::vector<ToySample>& train,
                                    const TrainConfig& cfg) {
  if (to_T > from_T) throw ConfigError("timestep prune: to_T > from_T");
  if (to_T < 1 || from_T > 3) throw ConfigError("timestep prune: T out of range (1..3)");
  if (model.stage() < TrainStage::kQuantized) {
    throw PhaseError("stage order violation: quantize before timestep pruning");
  }
  if (model.timesteps() != from_T) {
    throw ConfigError("timestep prune: model is not trained at from_T");
  }
  if (model.stage() == TrainStage::kQuantized) model.advance(TrainStage::kPruned);
  for (int T = from_T - 1; T >= to_T; --T) {
    model.set_timesteps(T);
    train_epochs(model, train, cfg, cfg.prune_epochs, cfg.lr, kStreamPrune,
                 [](int, ForwardOptions* o) { o->weights = WeightMode::kTernary; },
                 nullptr);
  }
  return model;
}

namespace {

double chip_accuracy(const SnnModel& model, const std::vector<ToySample>& test,
                     const ChipSample& chip_in, bool with_sa) {
  ChipSample chip = chip_in;
  int correct = 0;
  for (std::size_t j = 0; j < test.size(); ++j) {
    LayerRunOptions opts;
    opts.celsius = 25.0;
    opts.sa = with_sa ? &chip.sa : nullptr;
    opts.noise_seed = hash_key({chip.sa.seed, static_cast<std::uint64_t>(j)});
    const NetworkRun run = run_network(
        chip.ir, chip.plan, chip.array,
        truncate_timesteps(test[j].x, model.timesteps()), opts);
    if (run.predicted == test[j].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

double evaluate_ideal(const SnnModel& model, const std::vector<ToySample>& test,
                      const TrainConfig& cfg) {
  if (test.empty()) return 0.0;
  const ChipSample chip = sample_chip(model, VariationProfile::none(), cfg.geometry,
                                      cfg.seed, cfg.ternary_threshold);
  return chip_accuracy(model, test, chip, false);
}

double evaluate_on_chips(const SnnModel& model,
                         const std::vector<ToySample>& test,
                         const VariationProfile& profile, int n_mc,
                         const TrainConfig& cfg) {
  if (n_mc < 1) throw ConfigError("n_mc must be >= 1");
  if (test.empty()) return 0.0;
  // One chip per task; summed in index order.
  std::vector<double> acc(n_mc, 0.0);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n_mc; i = next++) {
      const std::uint64_t seed =
          hash_key({cfg.seed, kStreamEvalChip, static_cast<std::uint64_t>(i)});
      const ChipSample chip =
          sample_chip(model, profile, cfg.geometry, seed, cfg.ternary_threshold);
      acc[i] = chip_accuracy(model, test, chip, true);
    }
  };
  const int threads = std::min<int>(n_mc, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  double sum = 0.0;
  for (double a : acc) sum += a;
  return sum / n_mc;
}

AccuracyTriple variation_finetune(SnnModel& model,
                                  const VariationProfile& profile, int n_mc,
                                  const std::vector<ToySample>& train,
                                  const std::vector<ToySample>& test,
                                  const TrainConfig& cfg) {
  if (n_mc < 1) throw ConfigError("variation_finetune: n_mc must be >= 1");
  if (model.stage() < TrainStage::kQuantized) {
    throw PhaseError("stage order violation: quantize before variation fine-tuning");
  }
  AccuracyTriple r;
  r.ideal_acc = evaluate_ideal(model, test, cfg);
  r.degraded_acc = evaluate_on_chips(model, test, profile, n_mc, cfg);
  model.advance(TrainStage::kFinetuned);
  train_epochs(model, train, cfg, cfg.finetune_epochs, cfg.finetune_lr, kStreamFinetune,
               [](int, ForwardOptions* o) { o->weights = WeightMode::kTernary; },
               &profile);
  r.recovered_acc = evaluate_on_chips(model, test, profile, n_mc, cfg);
  return r;
}

TrainReport run_training(const TrainConfig& cfg, SnnModel* final_model) {
  cfg.validate();
  const auto train = make_toy_dataset(cfg.task, cfg.train_samples,
                                      hash_key({cfg.seed, kStreamTrainSet}));
  const auto test = make_toy_dataset(cfg.task, cfg.test_samples,
                                     hash_key({cfg.seed, kStreamTestSet}));
  TrainReport rep;
  SnnModel model(cfg.net, cfg.from_timesteps, cfg.seed);
  pretrain(model, train, cfg);
  {
    ForwardOptions o;
    o.logit_scale = cfg.logit_scale;
    int correct = 0;
    for (const auto& s : test) {
      if (loss_and_grad(model, s.x, s.label, o, nullptr).predicted == s.label) ++correct;
    }
    rep.stage_accuracy.emplace_back("pretrain_full_precision",
                                    static_cast<double>(correct) / test.size());
  }
  progressive_quantize(model, train, cfg);
  rep.stage_accuracy.emplace_back("quantized", evaluate_ideal(model, test, cfg));
  model = progressive_timestep_prune(std::move(model), cfg.from_timesteps,
                                     cfg.target_timesteps, train, cfg);
  rep.stage_accuracy.emplace_back("pruned_T" + std::to_string(model.timesteps()),
                                  evaluate_ideal(model, test, cfg));
  rep.triple = variation_finetune(model, cfg.variation, cfg.n_mc, train, test, cfg);
  rep.final_timesteps = model.timesteps();
  if (final_model != nullptr) *final_model = model;
  return rep;
}

GradientCheck gradient_check(const SnnModel& model,
                             const std::vector<ToySample>& samples,
                             const ForwardOptions& opts_in, double eps,
                             double tolerance) {
  ForwardOptions opts = opts_in;
  opts.relaxed = true;
  opts.weights = WeightMode::kLatent;
  opts.hardware = nullptr;
  SnnModel probe = model;
  auto total_loss = [&](const SnnModel& m) {
    double l = 0.0;
    for (const auto& s : samples) l += loss_and_grad(m, s.x, s.label, opts, nullptr).loss;
    return l;
  };
  std::vector<std::vector<double>> grads;
  for (const auto& s : samples) loss_and_grad(model, s.x, s.label, opts, &grads);
  GradientCheck gc;
  for (std::size_t l = 0; l < probe.latent().size(); ++l) {
    for (std::size_t i = 0; i < probe.latent()[l].size(); ++i) {
      const double w0 = probe.latent()[l][i];
      probe.latent()[l][i] = w0 + eps;
      const double up = total_loss(probe);
      probe.latent()[l][i] = w0 - eps;
      const double down = total_loss(probe);
      probe.latent()[l][i] = w0;
      const double fd = (up - down) / (2.0 * eps);
      const double a = grads[l][i];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
      gc.worst_relative_error = std::max(gc.worst_relative_error, rel);
      ++gc.parameters;
      if (rel <= tolerance) ++gc.passed;
    }
  }
  return gc;
}

}  // namespace cimsnn

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

// Test-only integer oracle and random network generator. Written from the
// neuron equations directly, without calling the library's reference path.

#ifndef CIMSNN_TESTS_ORACLE_HPP_
#define CIMSNN_TESTS_ORACLE_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "cimsnn/model_ir.hpp"

namespace cimsnn::testing {

// Spikes as [t][c][l] ints.
using Raster = std::vector<std::vector<std::vector<int>>>;

inline Raster to_raster(const SpikeTensor& s) {
  Raster r(s.timesteps(), std::vector<std::vector<int>>(s.channels(),
                                                        std::vector<int>(s.length())));
  for (int t = 0; t < s.timesteps(); ++t)
    for (int c = 0; c < s.channels(); ++c)
      for (int l = 0; l < s.length(); ++l) r[t][c][l] = s.at(t, c, l);
  return r;
}

inline int raster_len(const Raster& r) { return r.empty() || r[0].empty() ? 0 : r[0][0].size(); }

// Dot product of one kernel window against a zero-padded copy of the input.
inline std::vector<std::vector<std::vector<long>>> window_sums(const LayerSpec& l,
                                                               const TernaryWeights& w,
                                                               const Raster& in) {
  const int T = in.size();
  const int L = raster_len(in);
  const int padded = L + 2 * l.padding;
  const int P = (padded - l.kernel) / l.stride + 1;
  std::vector<std::vector<std::vector<long>>> out(
      T, std::vector<std::vector<long>>(l.out_channels, std::vector<long>(P, 0)));
  for (int t = 0; t < T; ++t) {
    std::vector<std::vector<int>> x(l.in_channels, std::vector<int>(padded, 0));
    for (int c = 0; c < l.in_channels; ++c)
      for (int i = 0; i < L; ++i) x[c][i + l.padding] = in[t][c][i];
    for (int o = 0; o < l.out_channels; ++o)
      for (int p = 0; p < P; ++p)
        for (int c = 0; c < l.in_channels; ++c)
          for (int k = 0; k < l.kernel; ++k)
            out[t][o][p] += w.at(o, c, k) * x[c][p * l.stride + k];
  }
  return out;
}

struct OracleRun {
  std::vector<Raster> spikes;  // every conv1d / maxpool output, in order
  std::vector<double> features;
  int predicted = -1;
};

// V(t) = V(t-1)(1 - S(t-1)) + sum W*IN, S = [V >= threshold].
inline OracleRun oracle_forward(const NetworkIR& net, const SpikeTensor& input,
                                long threshold = 5) {
  OracleRun run;
  Raster cur = to_raster(input);
  std::vector<double> feat;
  int feat_len = 0;
  bool have = false;
  auto counts = [](const Raster& r, int* len) {
    const int C = r.empty() ? 0 : r[0].size();
    *len = raster_len(r);
    std::vector<double> f(static_cast<std::size_t>(C) * *len, 0.0);
    for (const auto& plane : r)
      for (int c = 0; c < C; ++c)
        for (int l = 0; l < *len; ++l) f[c * *len + l] += plane[c][l];
    return f;
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    if (l.kind == LayerKind::kConv1d) {
      const auto sums = window_sums(l, net.weights_for(i), cur);
      const int T = sums.size();
      const int P = sums[0][0].size();
      Raster out(T, std::vector<std::vector<int>>(l.out_channels, std::vector<int>(P)));
      for (int o = 0; o < l.out_channels; ++o) {
        for (int p = 0; p < P; ++p) {
          long v = 0;
          int s = 0;
          for (int t = 0; t < T; ++t) {
            v = v * (1 - s) + sums[t][o][p];
            s = v >= threshold;
            out[t][o][p] = s;
          }
        }
      }
      cur = out;
      run.spikes.push_back(cur);
    } else if (l.kind == LayerKind::kMaxPool) {
      const int L = raster_len(cur) / l.pool;
      Raster out(cur.size(), std::vector<std::vector<int>>(cur[0].size(), std::vector<int>(L)));
      for (std::size_t t = 0; t < cur.size(); ++t)
        for (std::size_t c = 0; c < cur[0].size(); ++c)
          for (int x = 0; x < L; ++x)
            for (int j = 0; j < l.pool; ++j) out[t][c][x] |= cur[t][c][x * l.pool + j];
      cur = out;
      run.spikes.push_back(cur);
    } else if (l.kind == LayerKind::kAccumulateHead) {
      const auto sums = window_sums(l, net.weights_for(i), cur);
      const int P = sums[0][0].size();
      feat.assign(static_cast<std::size_t>(l.out_channels) * P, 0.0);
      for (const auto& plane : sums)
        for (int o = 0; o < l.out_channels; ++o)
          for (int p = 0; p < P; ++p) feat[o * P + p] += plane[o][p];
      feat_len = P;
      have = true;
    } else if (l.kind == LayerKind::kAvgPool) {
      if (!have) feat = counts(cur, &feat_len);
      have = true;
      const int C = feat.size() / feat_len;
      const int L = feat_len / l.pool;
      std::vector<double> out(static_cast<std::size_t>(C) * L, 0.0);
      for (int c = 0; c < C; ++c)
        for (int x = 0; x < L; ++x) {
          for (int j = 0; j < l.pool; ++j) out[c * L + x] += feat[c * feat_len + x * l.pool + j];
          out[c * L + x] /= l.pool;
        }
      feat = out;
      feat_len = L;
    } else {
      if (!have) feat = counts(cur, &feat_len);
      have = true;
      const TernaryWeights& w = net.weights_for(i);
      std::vector<double> scores(w.out, 0.0);
      for (int o = 0; o < w.out; ++o)
        for (int j = 0; j < w.in; ++j) scores[o] += w.at(o, j, 0) * feat[j];
      feat = scores;
      feat_len = 1;
    }
  }
  if (!have) feat = counts(cur, &feat_len);
  run.features = feat;
  for (int i = 0; i < static_cast<int>(feat.size()); ++i)
    if (run.predicted < 0 || feat[i] > feat[run.predicted]) run.predicted = i;
  return run;
}

// Input spike tensor seen by every layer, from the oracle's spike outputs.
inline std::vector<SpikeTensor> layer_inputs(const NetworkIR& net, const SpikeTensor& input) {
  const OracleRun run = oracle_forward(net, input);
  std::vector<SpikeTensor> inputs;
  SpikeTensor cur = input;
  std::size_t k = 0;
  for (const LayerSpec& l : net.layers()) {
    inputs.push_back(cur);
    if (l.kind != LayerKind::kConv1d && l.kind != LayerKind::kMaxPool) continue;
    const Raster& r = run.spikes[k++];
    SpikeTensor next(r.size(), r[0].size(), r[0][0].size());
    for (std::size_t t = 0; t < r.size(); ++t)
      for (std::size_t c = 0; c < r[t].size(); ++c)
        for (std::size_t x = 0; x < r[t][c].size(); ++x) next.set(t, c, x, r[t][c][x]);
    cur = next;
  }
  return inputs;
}

// One SOP per (input spike, nonzero weight) pair that lands inside the output.
inline std::int64_t brute_sops(const NetworkIR& net, const std::vector<SpikeTensor>& inputs) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    if (l.kind != LayerKind::kConv1d && l.kind != LayerKind::kAccumulateHead) continue;
    const TernaryWeights& w = net.weights_for(i);
    const SpikeTensor& in = inputs[i];
    const int P = (in.length() + 2 * l.padding - l.kernel) / l.stride + 1;
    for (int t = 0; t < in.timesteps(); ++t)
      for (int o = 0; o < l.out_channels; ++o)
        for (int p = 0; p < P; ++p)
          for (int c = 0; c < l.in_channels; ++c)
            for (int k = 0; k < l.kernel; ++k) {
              const int x = p * l.stride + k - l.padding;
              if (x >= 0 && x < in.length() && in.at(t, c, x) && w.at(o, c, k) != 0) ++n;
            }
  }
  return n;
}

inline TernaryWeights random_weights(std::mt19937_64& rng, int out, int in, int k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.3 + 0.7 * u(rng);
  TernaryWeights w(out, in, k);
  for (auto& v : w.w) v = u(rng) < density ? (u(rng) < 0.55 ? 1 : -1) : 0;
  return w;
}

// At most three layers and 64 neurons per layer, T in {1, 2, 3}.
inline NetworkIR random_small_net(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int T = pick(1, 3);
  const int in_ch = pick(1, 8);
  const int in_len = pick(4, 24);
  const int n = pick(1, 3);
  std::vector<LayerSpec> layers;
  std::vector<TernaryWeights> weights;
  int ch = in_ch, len = in_len;
  for (int i = 0; i < n; ++i) {
    const bool last = i == n - 1;
    const int roll = pick(0, 9);
    if (roll < 2 && len >= 2) {
      layers.push_back({LayerKind::kMaxPool, ch, ch, 1, 2, 0, 2});
      len /= 2;
      continue;
    }
    LayerSpec l;
    l.kind = last && roll == 9 && i > 0 ? LayerKind::kAccumulateHead : LayerKind::kConv1d;
    l.in_channels = ch;
    l.out_channels = pick(1, 64);
    l.kernel = pick(1, std::min(5, len));
    l.padding = pick(0, l.kernel / 2);
    l.stride = 1;
    layers.push_back(l);
    weights.push_back(random_weights(rng, l.out_channels, ch, l.kernel));
    ch = l.out_channels;
    len = len + 2 * l.padding - l.kernel + 1;
  }
  return NetworkIR("random", layers, T, in_ch, in_len, weights);
}

inline SpikeTensor random_spikes(std::mt19937_64& rng, int T, int C, int L, double density) {
  std::bernoulli_distribution b(density);
  SpikeTensor s(T, C, L);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < C; ++c)
      for (int l = 0; l < L; ++l) s.set(t, c, l, b(rng));
  return s;
}

}  // namespace cimsnn::testing

#endif  // CIMSNN_TESTS_ORACLE_HPP_

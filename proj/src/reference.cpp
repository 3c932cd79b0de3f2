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

#include "cimsnn/reference.hpp"

#include "cimsnn/errors.hpp"

namespace cimsnn {

namespace {

std::int64_t dot(const LayerSpec& l, const TernaryWeights& w,
                 const SpikeTensor& in, int t, int o, int p) {
  std::int64_t acc = 0;
  for (int k = 0; k < l.kernel; ++k) {
    const int pos = p * l.stride + k - l.padding;
    if (pos < 0 || pos >= in.length()) continue;
    for (int c = 0; c < l.in_channels; ++c) {
      acc += w.at(o, c, k) * static_cast<int>(in.at(t, c, pos));
    }
  }
  return acc;
}

int out_length(const LayerSpec& l, int in_length) {
  return (in_length + 2 * l.padding - l.kernel) / l.stride + 1;
}

}  // namespace

SpikeTensor reference_conv(const LayerSpec& layer, const TernaryWeights& w,
                           const SpikeTensor& input, int threshold) {
  if (input.channels() != layer.in_channels) {
    throw ShapeError("reference_conv: channel mismatch");
  }
  const int T = input.timesteps();
  const int P = out_length(layer, input.length());
  SpikeTensor out(T, layer.out_channels, P);
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int p = 0; p < P; ++p) {
      std::int64_t v = 0;
      int s = 0;
      for (int t = 0; t < T; ++t) {
        v = v * (1 - s) + dot(layer, w, input, t, o, p);
        s = v >= threshold ? 1 : 0;
        out.set(t, o, p, s == 1);
      }
    }
  }
  return out;
}

std::vector<std::int64_t> reference_accumulate(const LayerSpec& layer,
                                               const TernaryWeights& w,
                                               const SpikeTensor& input) {
  const int P = out_length(layer, input.length());
  std::vector<std::int64_t> out(static_cast<std::size_t>(layer.out_channels) * P, 0);
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int p = 0; p < P; ++p) {
      for (int t = 0; t < input.timesteps(); ++t) {
        out[static_cast<std::size_t>(o) * P + p] += dot(layer, w, input, t, o, p);
      }
    }
  }
  return out;
}

ReferenceRun reference_forward(const NetworkIR& net, const SpikeTensor& input,
                               int threshold) {
  ReferenceRun run;
  SpikeTensor cur = input;
  std::vector<double> feat;
  int feat_len = 0;
  bool have_features = false;
  auto counts = [](const SpikeTensor& s) {
    std::vector<double> f(static_cast<std::size_t>(s.channels()) * s.length(), 0.0);
    for (int t = 0; t < s.timesteps(); ++t) {
      for (int c = 0; c < s.channels(); ++c) {
        for (int l = 0; l < s.length(); ++l) {
          f[static_cast<std::size_t>(c) * s.length() + l] += s.at(t, c, l);
        }
      }
    }
    return f;
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    switch (l.kind) {
      case LayerKind::kConv1d:
        cur = reference_conv(l, net.weights_for(i), cur, threshold);
        run.layer_outputs.push_back(cur);
        break;
      case LayerKind::kMaxPool: {
        SpikeTensor pooled(cur.timesteps(), cur.channels(), cur.length() / l.pool);
        for (int t = 0; t < cur.timesteps(); ++t) {
          for (int c = 0; c < cur.channels(); ++c) {
            for (int x = 0; x < pooled.length(); ++x) {
              int any = 0;
              for (int j = 0; j < l.pool; ++j) any |= cur.at(t, c, x * l.pool + j);
              pooled.set(t, c, x, any != 0);
            }
          }
        }
        cur = pooled;
        run.layer_outputs.push_back(cur);
        break;
      }
      case LayerKind::kAccumulateHead: {
        const auto sums = reference_accumulate(l, net.weights_for(i), cur);
        feat.assign(sums.begin(), sums.end());
        feat_len = out_length(l, cur.length());
        have_features = true;
        break;
      }
      case LayerKind::kAvgPool: {
        if (!have_features) {
          feat = counts(cur);
          feat_len = cur.length();
          have_features = true;
        }
        const int channels = static_cast<int>(feat.size()) / feat_len;
        const int L = feat_len / l.pool;
        std::vector<double> pooled(static_cast<std::size_t>(channels) * L, 0.0);
        for (int c = 0; c < channels; ++c) {
          for (int x = 0; x < L; ++x) {
            double sum = 0.0;
            for (int j = 0; j < l.pool; ++j) {
              sum += feat[static_cast<std::size_t>(c) * feat_len + x * l.pool + j];
            }
            pooled[static_cast<std::size_t>(c) * L + x] = sum / l.pool;
          }
        }
        feat = pooled;
        feat_len = L;
        break;
      }
      case LayerKind::kClassifier: {
        if (!have_features) {
          feat = counts(cur);
          have_features = true;
        }
        const TernaryWeights& w = net.weights_for(i);
        run.scores.assign(w.out, 0.0);
        for (int o = 0; o < w.out; ++o) {
          for (int j = 0; j < w.in; ++j) run.scores[o] += w.at(o, j, 0) * feat[j];
        }
        break;
      }
    }
  }
  if (!have_features) feat = counts(cur);
  run.features = feat;
  if (run.scores.empty()) run.scores = feat;
  for (int i = 0; i < static_cast<int>(run.scores.size()); ++i) {
    if (run.predicted < 0 || run.scores[i] > run.scores[run.predicted]) run.predicted = i;
  }
  return run;
}

}  // namespace cimsnn

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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cimsnn/errors.hpp"
#include "cimsnn/keyword_ref.hpp"
#include "cimsnn/model_ir.hpp"
#include "cimsnn/tensor_io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace cimsnn;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("cimsnn_ir_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

NetworkIR tiny_net() {
  std::vector<LayerSpec> layers(2);
  layers[0] = {LayerKind::kConv1d, 2, 3, 3, 1, 1, 1};
  layers[1] = {LayerKind::kMaxPool, 3, 3, 1, 2, 0, 2};
  TernaryWeights w(3, 2, 3);
  for (std::size_t i = 0; i < w.w.size(); ++i) w.w[i] = static_cast<std::int8_t>(i % 3) - 1;
  return NetworkIR("tiny", layers, 2, 2, 8, {w});
}

}  // namespace

TEST_CASE("ternary_quantize keeps signs and zeroes the dead band") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(1 + trial % 50);
    for (double& x : w) x = d(rng);
    const double frac = 0.05 + 0.9 * (trial % 10) / 10.0;
    const auto q = ternary_quantize(w, frac);
    double max_abs = 0;
    for (double x : w) max_abs = std::max(max_abs, std::abs(x));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int expect = w[i] > frac * max_abs ? 1 : (w[i] < -frac * max_abs ? -1 : 0);
      CHECK(q[i] == expect);
      if (q[i] != 0) CHECK((q[i] > 0) == (w[i] > 0));
    }
  }
}

TEST_CASE("ternary_quantize edge cases") {
  const std::vector<double> zeros(5, 0.0);
  for (auto v : ternary_quantize(zeros)) CHECK(v == 0);
  CHECK_THROWS_AS(ternary_quantize(std::vector<double>{}), ShapeError);
  CHECK_THROWS_AS(ternary_quantize(zeros, 0.0), ConfigError);
  CHECK_THROWS_AS(ternary_quantize(zeros, 1.0), ConfigError);
}

TEST_CASE("tensor file header is four little-endian u32 dims") {
  Int8Tensor t({2, 3, 1, 1});
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = static_cast<std::int8_t>(i) - 3;
  std::stringstream ss;
  write_tensor(ss, t);
  const std::string b = ss.str();
  REQUIRE(b.size() == 16 + 6);
  const unsigned char expect_hdr[16] = {2, 0, 0, 0, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
  for (int i = 0; i < 16; ++i) CHECK(static_cast<unsigned char>(b[i]) == expect_hdr[i]);
  CHECK(static_cast<std::int8_t>(b[16]) == -3);
  CHECK(static_cast<std::int8_t>(b[21]) == 2);
  std::stringstream in(b);
  CHECK(read_tensor(in) == t);
}

TEST_CASE("config round trip reproduces the network") {
  const fs::path dir = scratch("roundtrip");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const NetworkIR net = make_keyword_ref(seed);
    write_file(dir / "net.json", emit_config(net, "net.bin"));
    write_network_weights(net, dir / "net.bin");
    const NetworkIR back = load_network_config(dir / "net.json");
    CHECK(back == net);
  }
  const NetworkIR t = tiny_net();
  write_file(dir / "tiny.json", emit_config(t, "tiny.bin"));
  write_network_weights(t, dir / "tiny.bin");
  CHECK(load_network_config(dir / "tiny.json") == t);
}

TEST_CASE("keyword_ref topology") {
  const NetworkIR net = make_keyword_ref(1);
  const auto& s = net.shapes();
  CHECK(net.input_channels() == 16);
  CHECK(net.input_length() == 4000);
  CHECK(net.timesteps() == 3);
  CHECK(s[0].out_length == 3968);
  CHECK(s[1].out_length == 496);
  CHECK(net.output_channels() == 12);
  for (const auto& w : net.weights()) {
    for (auto v : w.w) CHECK((v >= -1 && v <= 1));
  }
}

TEST_CASE("config errors") {
  const fs::path dir = scratch("errors");
  const std::string base =
      R"({"timesteps": 2, "input_length": 8, "weights_file": "w.bin", "layers": [)";
  SUBCASE("missing weights file") {
    write_file(dir / "a.json",
               base + R"({"kind": "conv1d", "in_channels": 2, "out_channels": 3, "kernel": 3}]})");
    try {
      load_network_config(dir / "a.json");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("weights_file not found") != std::string::npos);
      CHECK(e.exit_code() == 2);
    }
  }
  SUBCASE("unknown layer field") {
    CHECK_THROWS_AS(parse_network_config(base + R"({"kind": "maxpool", "pool": 2, "bogus": 1}]})",
                                         dir),
                    ConfigError);
  }
  SUBCASE("unknown kind") {
    CHECK_THROWS_AS(parse_network_config(base + R"({"kind": "lstm", "pool": 2}]})", dir),
                    ConfigError);
  }
  SUBCASE("timesteps out of range") {
    CHECK_THROWS_AS(parse_network_config(
                        R"({"timesteps": 4, "input_length": 8, "layers": []})", dir),
                    ConfigError);
  }
  SUBCASE("shape chain mismatch") {
    std::vector<LayerSpec> layers(2);
    layers[0] = {LayerKind::kConv1d, 2, 3, 1, 1, 0, 1};
    layers[1] = {LayerKind::kConv1d, 4, 3, 1, 1, 0, 1};
    CHECK_THROWS_AS(NetworkIR("x", layers, 1, 2, 4, {TernaryWeights(3, 2, 1), TernaryWeights(3, 4, 1)}),
                    ConfigError);
  }
  SUBCASE("weight outside {-1,0,1}") {
    std::vector<LayerSpec> layers(1);
    layers[0] = {LayerKind::kConv1d, 1, 1, 1, 1, 0, 1};
    TernaryWeights w(1, 1, 1);
    w.w[0] = 2;
    CHECK_THROWS_AS(NetworkIR("x", layers, 1, 1, 4, {w}), ConfigError);
  }
  SUBCASE("CIM layer after avgpool") {
    std::vector<LayerSpec> layers(2);
    layers[0] = {LayerKind::kAvgPool, 2, 2, 1, 2, 0, 2};
    layers[1] = {LayerKind::kConv1d, 2, 2, 1, 1, 0, 1};
    CHECK_THROWS_AS(NetworkIR("x", layers, 1, 2, 4, {TernaryWeights(2, 2, 1)}), ConfigError);
  }
}

TEST_CASE("an empty model is valid") {
  const NetworkIR net =
      parse_network_config(R"({"timesteps": 1, "input_length": 8, "layers": []})", ".");
  CHECK(net.layers().empty());
  CHECK(validate_cim_mappability(net, ArrayGeometry()).pages == 0);
}

TEST_CASE("mappability") {
  const NetworkIR net = make_keyword_ref(1);
  const MappingPlan plan = validate_cim_mappability(net, ArrayGeometry());
  CHECK(plan.pages == 1);
  CHECK(plan.placements.size() == net.cim_layers().size());
  // No two placements on a page share a cell.
  for (std::size_t a = 0; a < plan.placements.size(); ++a) {
    for (std::size_t b = a + 1; b < plan.placements.size(); ++b) {
      const auto& p = plan.placements[a];
      const auto& q = plan.placements[b];
      if (p.page != q.page) continue;
      const bool rows = p.row_offset < q.row_offset + q.rows && q.row_offset < p.row_offset + p.rows;
      const bool cols = p.pair_offset < q.pair_offset + q.pairs && q.pair_offset < p.pair_offset + p.pairs;
      CHECK_FALSE((rows && cols));
    }
  }
  // 528 weight rows do not fit a 256-row array.
  try {
    validate_cim_mappability(net, 256, 1304);
    FAIL("expected MappingError");
  } catch (const MappingError& e) {
    CHECK(std::string(e.what()).find("partial-sum required") != std::string::npos);
  }
}

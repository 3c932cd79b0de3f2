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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kSource = CIMSNN_SOURCE_DIR;
const fs::path kKeywordRef = kSource / "configs" / "keyword_ref" / "keyword_ref.json";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("cimsnn_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

struct Result {
  int code = -1;
  std::string err;
};

Result run(const std::string& args, const std::string& env = "") {
  const fs::path err = scratch("stderr.txt");
  const std::string cmd =
      env + " \"" + std::string(CIMSNN_BIN) + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// keyword_ref with an edited document, written next to the original weights.
fs::path variant(const std::string& name, const json& patch) {
  json doc = json::parse(slurp(kKeywordRef));
  doc.merge_patch(patch);
  doc["weights_file"] = (kKeywordRef.parent_path() / "keyword_ref.bin").string();
  if (patch.contains("weights_file")) doc["weights_file"] = patch["weights_file"];
  const fs::path p = scratch(name);
  std::ofstream(p) << doc.dump(2);
  return p;
}

fs::path toy_train_config() {
  json doc = json::parse(slurp(kSource / "configs" / "toy_train.json"));
  json& t = doc["train"];
  t["train_samples"] = 64;
  t["test_samples"] = 32;
  t["epochs"] = {{"pretrain", 2}, {"quantize", 1}, {"prune", 1}, {"finetune", 1}};
  t["n_mc"] = 2;
  const fs::path p = scratch("toy_small.json");
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("infer").code == 2);
  const Result missing_cfg = run("schedule -c " + q(scratch("absent.json")) + " -o " +
                                 q(scratch("o1")));
  CHECK(missing_cfg.code == 2);
  const fs::path bad_json = scratch("bad.json");
  std::ofstream(bad_json) << "{ not json";
  CHECK(run("schedule -c " + q(bad_json) + " -o " + q(scratch("o2"))).code == 2);
  CHECK(run("infer -c " + q(kKeywordRef) + " -o " + q(scratch("o3")) + " --mode sideways")
            .code == 2);
  const fs::path small = variant("small_array.json", {{"array", {{"rows", 256}}}});
  CHECK(run("infer -c " + q(small) + " -o " + q(scratch("o4")) + " --samples 1").code == 1);
}

TEST_CASE("a missing weights file is an I/O error") {
  const fs::path cfg = variant("noweights.json", {{"weights_file", "missing.bin"}});
  const Result r = run("infer -c " + q(cfg) + " -o " + q(scratch("nw")));
  CHECK(r.code == 2);
  CHECK(r.err.find("weights_file not found") != std::string::npos);
  CHECK_FALSE(fs::exists(scratch("nw")));
}

TEST_CASE("a temperature sweep writes 13 rows") {
  const fs::path out = scratch("sweep");
  REQUIRE(run("infer -c " + q(kKeywordRef) + " -o " + q(out) +
              " --samples 1 --temp-sweep -20:100:10")
              .code == 0);
  const auto rows = lines(out / "results.csv");
  REQUIRE(rows.size() == 14);
  CHECK(rows[1].rfind("infer,-20,", 0) == 0);
  CHECK(rows[13].rfind("infer,100,", 0) == 0);
  const fs::path dev = scratch("dev");
  REQUIRE(run("device-sweep -o " + q(dev) + " --seeds 4").code == 0);
  CHECK(lines(dev / "device_sweep.csv").size() == 14);
}

TEST_CASE("an empty model schedules in zero cycles") {
  const fs::path cfg = scratch("empty.json");
  std::ofstream(cfg) << R"({"timesteps": 1, "input_length": 8, "layers": []})";
  const fs::path out = scratch("empty_out");
  REQUIRE(run("schedule -c " + q(cfg) + " -o " + q(out)).code == 0);
  const json r = json::parse(slurp(out / "schedule_report.json"));
  CHECK(r.at("total_cycles") == 0);
  REQUIRE(run("infer -c " + q(cfg) + " -o " + q(out) + " --samples 1").code == 0);
}

TEST_CASE("outputs, manifest and the output directory") {
  const fs::path out = scratch("full");
  REQUIRE(run("infer -c " + q(kKeywordRef) + " -o " + q(out) +
              " --samples 1 --dump-spikes --trace --energy-json --svg --pipelined-pooling")
              .code == 0);
  for (const char* f : {"manifest.json", "config.json", "results.csv", "predictions.csv",
                        "spikes.csv", "trace.csv", "energy.json", "temperature.svg",
                        "schedule_report.json"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  const std::string manifest = slurp(out / "manifest.json");
  const json m = json::parse(manifest);
  CHECK(m.at("subcommand") == "infer");
  for (const char* word : {"timestamp", "date", "created", "wall_clock"}) {
    CHECK(manifest.find(word) == std::string::npos);
  }
  CHECK(lines(out / "spikes.csv").at(0) == "neuron,timestep,fired,layer,sample,celsius");
  CHECK(slurp(out / "temperature.svg").find("<svg") != std::string::npos);
  const json e = json::parse(slurp(out / "energy.json"));
  CHECK(e.at("per_temperature").size() == 1);

  const fs::path env_out = scratch("from_env");
  REQUIRE(run("schedule -c " + q(kKeywordRef), "CIMSNN_OUT_DIR=" + q(env_out)).code == 0);
  CHECK(fs::exists(env_out / "schedule_report.json"));
  for (const auto& entry : fs::directory_iterator(env_out.parent_path())) {
    CHECK(entry.path().filename().string().find(".staging") == std::string::npos);
  }
}

TEST_CASE("a fixed-seed rerun appends an identical row") {
  const fs::path out = scratch("rerun");
  const std::string args = "infer -c " + q(kKeywordRef) + " -o " + q(out) + " --samples 1 --seed 7";
  REQUIRE(run(args).code == 0);
  REQUIRE(run(args).code == 0);
  const auto rows = lines(out / "results.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == rows[2]);
}

TEST_CASE("reports are byte-identical across runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string common = "infer -c " + q(kKeywordRef) + " --samples 2 --energy-json --seed 3 -o ";
  REQUIRE(run(common + q(a)).code == 0);
  REQUIRE(run(common + q(b)).code == 0);
  for (const char* f : {"results.csv", "predictions.csv", "energy.json", "schedule_report.json"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  const fs::path cfg = toy_train_config();
  const fs::path ta = scratch("train_a"), tb = scratch("train_b");
  REQUIRE(run("train -c " + q(cfg) + " -o " + q(ta)).code == 0);
  REQUIRE(run("train -c " + q(cfg) + " -o " + q(tb)).code == 0);
  for (const char* f : {"results.csv", "train_report.json", "model.json", "weights.bin"}) {
    CHECK_MESSAGE(slurp(ta / f) == slurp(tb / f), f);
  }
}

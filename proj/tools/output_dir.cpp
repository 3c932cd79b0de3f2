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

#include "output_dir.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cimsnn/errors.hpp"

namespace cimsnn::cli {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path(kDefaultOutDir);
}

OutputDir::OutputDir(fs::path target) : target_(std::move(target)) {
  if (target_.filename().empty()) target_ = target_.parent_path();
  const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
  stage_ = parent / ("." + target_.filename().string() + ".staging");
  std::error_code ec;
  fs::create_directories(parent, ec);
  fs::remove_all(stage_, ec);
  if (!fs::create_directory(stage_, ec) || ec) {
    throw IoError("cannot create output staging directory " + stage_.string());
  }
}

OutputDir::~OutputDir() {
  if (committed_) return;
  std::error_code ec;
  fs::remove_all(stage_, ec);
}

fs::path OutputDir::path(const std::string& name) const {
  return stage_ / name;
}

void OutputDir::write(const std::string& name, const std::string& content) {
  std::ofstream out(stage_ / name, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write " + (target_ / name).string());
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) {
    files_.push_back(name);
  }
}

void OutputDir::append_rows(const std::string& name, const std::string& header,
                            const std::string& rows) {
  std::string content;
  const bool fresh = std::find(files_.begin(), files_.end(), name) == files_.end();
  const fs::path from = fresh ? target_ / name : stage_ / name;
  if (std::ifstream in(from, std::ios::binary); in) {
    std::stringstream ss;
    ss << in.rdbuf();
    content = ss.str();
    if (fresh && content.compare(0, header.size() + 1, header + "\n") != 0) content.clear();
  }
  if (content.empty()) content = header + "\n";
  write(name, content + rows);
}

void OutputDir::adopt(const std::string& name) {
  if (!fs::exists(stage_ / name)) throw IoError("missing output " + (target_ / name).string());
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) {
    files_.push_back(name);
  }
}

std::vector<std::string> OutputDir::files() const {
  std::vector<std::string> f = files_;
  std::sort(f.begin(), f.end());
  return f;
}

void OutputDir::commit() {
  std::error_code ec;
  fs::path old;
  if (fs::exists(target_)) {
    old = target_;
    old += ".old";
    fs::remove_all(old, ec);
    fs::rename(target_, old, ec);
    if (ec) throw IoError("cannot replace output directory " + target_.string());
  }
  fs::rename(stage_, target_, ec);
  if (ec) {
    if (!old.empty()) fs::rename(old, target_, ec);
    throw IoError("cannot publish output directory " + target_.string());
  }
  committed_ = true;
  if (!old.empty()) fs::remove_all(old, ec);
}

}  // namespace cimsnn::cli

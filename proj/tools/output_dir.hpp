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

#ifndef CIMSNN_TOOLS_OUTPUT_DIR_HPP_
#define CIMSNN_TOOLS_OUTPUT_DIR_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace cimsnn::cli {

inline constexpr const char* kOutDirEnv = "CIMSNN_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "cimsnn_out";

// --out, else $CIMSNN_OUT_DIR, else ./cimsnn_out.
std::filesystem::path resolve_out_dir(const std::string& flag);

// Files are written into a hidden sibling staging directory which replaces
// the target in one rename on commit(). An uncommitted stage is removed.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path target);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& target() const { return target_; }
  std::filesystem::path path(const std::string& name) const;
  void write(const std::string& name, const std::string& content);
  // Appends CSV rows. The first time a name is touched in this run, rows
  // already committed under the target are carried over when their header
  // matches.
  void append_rows(const std::string& name, const std::string& header,
                   const std::string& rows);
  // Registers a file that was written directly to path(name).
  void adopt(const std::string& name);
  // Names of the files written so far, sorted.
  std::vector<std::string> files() const;
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path stage_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

}  // namespace cimsnn::cli

#endif  // CIMSNN_TOOLS_OUTPUT_DIR_HPP_

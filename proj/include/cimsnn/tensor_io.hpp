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

#ifndef CIMSNN_TENSOR_IO_HPP_
#define CIMSNN_TENSOR_IO_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace cimsnn {

// Dense int8 tensor with a fixed four-dimensional shape. Unused trailing
// dimensions are 1.
struct Int8Tensor {
  std::array<std::uint32_t, 4> dims{1, 1, 1, 1};
  std::vector<std::int8_t> data;

  Int8Tensor() = default;
  explicit Int8Tensor(std::array<std::uint32_t, 4> d);

  std::size_t size() const;
  std::int8_t& at(std::size_t a, std::size_t b, std::size_t c = 0,
                  std::size_t d = 0);
  std::int8_t at(std::size_t a, std::size_t b, std::size_t c = 0,
                 std::size_t d = 0) const;

  bool operator==(const Int8Tensor&) const = default;
};

// Record layout: four little-endian u32 dims followed by the int8 payload.
void write_tensor(std::ostream& out, const Int8Tensor& t);
Int8Tensor read_tensor(std::istream& in);

// A tensor file is a plain concatenation of records.
void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<Int8Tensor>& tensors);
std::vector<Int8Tensor> read_tensor_file(const std::filesystem::path& path);

}  // namespace cimsnn

#endif  // CIMSNN_TENSOR_IO_HPP_

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

#include "cimsnn/tensor_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "cimsnn/errors.hpp"

namespace cimsnn {

namespace {

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff),
                         static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t* v) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  *v = static_cast<std::uint32_t>(bytes[0]) |
       (static_cast<std::uint32_t>(bytes[1]) << 8) |
       (static_cast<std::uint32_t>(bytes[2]) << 16) |
       (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

std::uint64_t element_count(const std::array<std::uint32_t, 4>& d) {
  std::uint64_t n = 1;
  for (std::uint32_t x : d) {
    n *= x;
    if (n > kMaxElements) throw IoError("tensor record too large");
  }
  return n;
}

}  // namespace

Int8Tensor::Int8Tensor(std::array<std::uint32_t, 4> d)
    : dims(d), data(element_count(d), 0) {}

std::size_t Int8Tensor::size() const { return data.size(); }

std::int8_t& Int8Tensor::at(std::size_t a, std::size_t b, std::size_t c,
                            std::size_t d) {
  return data[((a * dims[1] + b) * dims[2] + c) * dims[3] + d];
}

std::int8_t Int8Tensor::at(std::size_t a, std::size_t b, std::size_t c,
                           std::size_t d) const {
  return data[((a * dims[1] + b) * dims[2] + c) * dims[3] + d];
}

void write_tensor(std::ostream& out, const Int8Tensor& t) {
  if (element_count(t.dims) != t.data.size()) {
    throw IoError("tensor payload does not match its dims");
  }
  for (std::uint32_t d : t.dims) put_u32(out, d);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size()));
  if (!out) throw IoError("tensor write failed");
}

Int8Tensor read_tensor(std::istream& in) {
  std::array<std::uint32_t, 4> dims{};
  for (auto& d : dims) {
    if (!get_u32(in, &d)) throw IoError("truncated tensor header");
  }
  Int8Tensor t(dims);
  if (!in.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size()))) {
    throw IoError("truncated tensor payload");
  }
  return t;
}

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<Int8Tensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& t : tensors) write_tensor(out, t);
}

std::vector<Int8Tensor> read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("weights_file not found: " + path.string());
  std::vector<Int8Tensor> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    out.push_back(read_tensor(in));
  }
  return out;
}

}  // namespace cimsnn

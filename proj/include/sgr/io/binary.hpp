/*
 * Copyright 2026 The sgretrieve Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "sgr/error.hpp"

namespace sgr::io {

/// Little-endian encoder into a byte buffer, independent of host order.
class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

/// Bounds-checked reader; any overrun is reported as CorruptFile.
class ByteReader {
 public:
  explicit ByteReader(std::vector<char> data, std::string source = {})
      : data_(std::move(data)), source_(std::move(source)) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() { return bytes(u32()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorKind::CorruptFile, source_ + ": unexpected end of file");
  }

  std::vector<char> data_;
  std::size_t pos_ = 0;
  std::string source_;
};

inline std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<char>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path + "'");
}

inline std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  return in;
}

}  // namespace sgr::io

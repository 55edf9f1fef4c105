/* Copyright 2026 The FlowHPC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FLOWHPC_BYTES_HPP_
#define FLOWHPC_BYTES_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "flowhpc/error.hpp"
#include "flowhpc/tensor.hpp"

namespace flowhpc {

// Little-endian byte buffer builder. All serialized formats in this project
// (graphs, wire frames, tile files) are explicitly little-endian.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void bytes(const void* data, size_t n) { raw(data, n); }
  void str(const std::string& s) { raw(s.data(), s.size()); }

  size_t size() const { return buf_.size(); }
  std::vector<uint8_t> take() { return std::move(buf_); }
  const std::vector<uint8_t>& data() const { return buf_; }

 private:
  void raw(const void* p, size_t n) {
    static_assert(std::endian::native == std::endian::little,
                  "serialization assumes a little-endian host");
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<uint8_t> buf_;
};

// Bounds-checked reader over a borrowed byte range. Overruns raise protocol
// errors instead of reading garbage.
class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  explicit ByteReader(const std::vector<uint8_t>& v) : ByteReader(v.data(), v.size()) {}

  uint8_t u8() { return *take(1); }
  uint16_t u16() { return load<uint16_t>(); }
  uint32_t u32() { return load<uint32_t>(); }
  uint64_t u64() { return load<uint64_t>(); }
  double f64() { return load<double>(); }

  std::string str(size_t n) {
    const uint8_t* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  std::vector<uint8_t> bytes(size_t n) {
    const uint8_t* p = take(n);
    return std::vector<uint8_t>(p, p + n);
  }
  const uint8_t* view(size_t n) { return take(n); }

  size_t remaining() const { return size_ - pos_; }
  size_t pos() const { return pos_; }
  bool done() const { return pos_ == size_; }

 private:
  template <typename T>
  T load() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const uint8_t* take(size_t n) {
    if (size_ - pos_ < n)
      throw_error(ErrorCode::kProtocol, "truncated buffer: need " + std::to_string(n) +
                                            " bytes at offset " + std::to_string(pos_));
    const uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

// Tensor encoding shared by the wire protocol and graph constants:
// dtype u8, rank u8, dims u64 each, then the raw row-major payload.
void encode_tensor(ByteWriter& w, const Tensor& t);
Tensor decode_tensor(ByteReader& r);

}  // namespace flowhpc

#endif  // FLOWHPC_BYTES_HPP_

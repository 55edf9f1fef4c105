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
#include "flowhpc/tile_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "flowhpc/bytes.hpp"
#include "flowhpc/error.hpp"

namespace flowhpc {
namespace {

constexpr char kTileMagic[4] = {'T', 'I', 'L', '1'};

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

void write_file_atomic(const std::string& path, const std::vector<uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(ErrorCode::kIoError, "cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw_error(ErrorCode::kIoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw_error(ErrorCode::kIoError, "rename " + tmp + ": " + ec.message());
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::kMissingTileFile, "missing tile file " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

void append_header(ByteWriter& w, const Tensor& payload, uint32_t tile_row, uint32_t tile_col) {
  w.bytes(kTileMagic, sizeof(kTileMagic));
  w.u8(static_cast<uint8_t>(payload.dtype()));
  w.u32(tile_row);
  w.u32(tile_col);
}

struct TileHeader {
  DType dtype;
  uint32_t row = 0;
  uint32_t col = 0;
};

TileHeader read_header(ByteReader& r, const std::string& path) {
  const std::string got = r.str(4);
  if (std::memcmp(got.data(), kTileMagic, 4) != 0) {
    throw_error(ErrorCode::kParseError, "bad tile magic in " + path + ", expected TIL1");
  }
  TileHeader h;
  h.dtype = dtype_from_tag(r.u8());
  h.row = r.u32();
  h.col = r.u32();
  return h;
}

Tensor take_payload(ByteReader& r, DType dtype, const Shape& shape, const std::string& path) {
  const uint64_t want = static_cast<uint64_t>(shape.elem_count()) * dtype_size(dtype);
  if (r.remaining() != want) {
    throw_error(ErrorCode::kLengthMismatch,
                path + " payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
                    std::to_string(want));
  }
  return Tensor::take(dtype, shape, r.bytes(want));
}

void check_index(const TileHeader& h, uint32_t expect_row, uint32_t expect_col,
                 const std::string& path) {
  if (h.row != expect_row || h.col != expect_col) {
    throw_error(ErrorCode::kParseError, path + " holds tile (" + std::to_string(h.row) + "," +
                                            std::to_string(h.col) + "), expected (" +
                                            std::to_string(expect_row) + "," +
                                            std::to_string(expect_col) + ")");
  }
}

}  // namespace

void TileAudit::record_read(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  ++reads_[basename_of(path)];
}

void TileAudit::record_write(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  ++writes_[basename_of(path)];
}

std::map<std::string, uint64_t> TileAudit::reads() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reads_;
}

std::map<std::string, uint64_t> TileAudit::writes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return writes_;
}

void write_square_tile(const std::string& path, uint32_t tile_row, uint32_t tile_col,
                       const Tensor& payload, TileAudit* audit) {
  if (payload.shape().rank() != 2 || payload.shape().dim(0) != payload.shape().dim(1)) {
    throw_error(ErrorCode::kInvalidArgument,
                "square tile payload must be (s,s), got " + payload.shape().to_string());
  }
  ByteWriter w;
  append_header(w, payload, tile_row, tile_col);
  w.u32(static_cast<uint32_t>(payload.shape().dim(0)));
  w.bytes(payload.raw(), payload.byte_size());
  write_file_atomic(path, w.take());
  if (audit != nullptr) audit->record_write(path);
}

Tensor read_square_tile(const std::string& path, uint32_t expect_row, uint32_t expect_col,
                        TileAudit* audit) {
  const std::vector<uint8_t> bytes = read_file(path);
  if (audit != nullptr) audit->record_read(path);
  ByteReader r(bytes.data(), bytes.size());
  const TileHeader h = read_header(r, path);
  const uint32_t edge = r.u32();
  check_index(h, expect_row, expect_col, path);
  return take_payload(r, h.dtype, Shape({edge, edge}), path);
}

void write_rect_tile(const std::string& path, uint32_t tile_row, uint32_t tile_col,
                     const Tensor& payload, TileAudit* audit) {
  uint64_t rows = 0;
  uint64_t cols = 0;
  if (payload.shape().rank() == 2) {
    rows = payload.shape().dim(0);
    cols = payload.shape().dim(1);
  } else if (payload.shape().rank() == 1) {
    rows = 1;
    cols = payload.shape().dim(0);
  } else {
    throw_error(ErrorCode::kInvalidArgument,
                "rect tile payload must be rank 1 or 2, got " + payload.shape().to_string());
  }
  if (rows > 0xffffffffull || cols > 0xffffffffull) {
    throw_error(ErrorCode::kInvalidArgument, "rect tile dims exceed u32");
  }
  ByteWriter w;
  append_header(w, payload, tile_row, tile_col);
  w.u32(static_cast<uint32_t>(rows));
  w.u32(static_cast<uint32_t>(cols));
  w.bytes(payload.raw(), payload.byte_size());
  write_file_atomic(path, w.take());
  if (audit != nullptr) audit->record_write(path);
}

Tensor read_rect_tile(const std::string& path, uint32_t expect_row, uint32_t expect_col,
                      TileAudit* audit) {
  const std::vector<uint8_t> bytes = read_file(path);
  if (audit != nullptr) audit->record_read(path);
  ByteReader r(bytes.data(), bytes.size());
  const TileHeader h = read_header(r, path);
  const uint32_t rows = r.u32();
  const uint32_t cols = r.u32();
  check_index(h, expect_row, expect_col, path);
  return take_payload(r, h.dtype, Shape({rows, cols}), path);
}

Tensor read_vector_tile(const std::string& path, uint32_t expect_index, TileAudit* audit) {
  Tensor rect = read_rect_tile(path, expect_index, 0, audit);
  if (rect.shape().dim(0) != 1) {
    throw_error(ErrorCode::kLengthMismatch,
                path + " is not a vector tile, shape " + rect.shape().to_string());
  }
  return rect.reshaped(Shape({rect.shape().dim(1)}));
}

std::string tile_path(const std::string& dir, const std::string& matrix, uint32_t row,
                      uint32_t col) {
  char name[64];
  std::snprintf(name, sizeof(name), "_%04u_%04u.til", row, col);
  return dir + "/" + matrix + name;
}

std::string vector_tile_path(const std::string& dir, const std::string& name, uint32_t index) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "_%04u.til", index);
  return dir + "/" + name + suffix;
}

}  // namespace flowhpc

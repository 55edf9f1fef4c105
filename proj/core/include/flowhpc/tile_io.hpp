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
#ifndef FLOWHPC_TILE_IO_HPP_
#define FLOWHPC_TILE_IO_HPP_

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "flowhpc/tensor.hpp"

namespace flowhpc {

// Records which tile files a role touched. The map-reduce tests assert the
// role separation (workers never see C tiles, reducers never see inputs)
// from these counters. Passing nullptr skips auditing.
class TileAudit {
 public:
  void record_read(const std::string& path);
  void record_write(const std::string& path);
  // Counts keyed by file basename.
  std::map<std::string, uint64_t> reads() const;
  std::map<std::string, uint64_t> writes() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, uint64_t> reads_;
  std::map<std::string, uint64_t> writes_;
};

// Square matrix tile, the matmul unit of storage. On disk: magic "TIL1",
// dtype u8, tile row u32, tile col u32, edge u32, raw little-endian
// row-major payload. Bit-exact.
void write_square_tile(const std::string& path, uint32_t tile_row, uint32_t tile_col,
                       const Tensor& payload, TileAudit* audit = nullptr);
Tensor read_square_tile(const std::string& path, uint32_t expect_row, uint32_t expect_col,
                        TileAudit* audit = nullptr);

// Rectangular variant used for row blocks and vectors: the edge field is
// replaced by rows u32, cols u32. A rank-1 tensor round-trips as rows=1.
void write_rect_tile(const std::string& path, uint32_t tile_row, uint32_t tile_col,
                     const Tensor& payload, TileAudit* audit = nullptr);
Tensor read_rect_tile(const std::string& path, uint32_t expect_row, uint32_t expect_col,
                      TileAudit* audit = nullptr);

// Reads a rect tile written from a rank-1 tensor and gives the vector back.
// The tile index is stored in the row field.
Tensor read_vector_tile(const std::string& path, uint32_t expect_index,
                        TileAudit* audit = nullptr);

// Canonical tile file names, zero-padded so a directory listing sorts in
// (row, col) order: "A_0003_0010.til".
std::string tile_path(const std::string& dir, const std::string& matrix, uint32_t row,
                      uint32_t col);
// "x_0007.til" for vector tiles and row blocks.
std::string vector_tile_path(const std::string& dir, const std::string& name, uint32_t index);

}  // namespace flowhpc

#endif  // FLOWHPC_TILE_IO_HPP_

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
#ifndef FLOWHPC_APPS_MATMUL_HPP_
#define FLOWHPC_APPS_MATMUL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/device.hpp"
#include "flowhpc/tile_io.hpp"

namespace flowhpc {

// Tiled C = A*B over a worker/reducer cluster. Workers multiply tile pairs
// from a shared index list and push partial tiles into parity-assigned
// reducer queues; reducers accumulate and write the C tiles they own.
struct MatmulPlan {
  uint32_t n = 0;
  uint32_t tile = 0;
  uint32_t workers = 1;
  uint32_t reducers = 2;
  std::string tiles_dir;
  std::string out_dir;
  uint32_t timeout_ms = 120000;
  // Workers normally walk a static round-robin shard of the work list. The
  // dynamic alternative pulls items from a shared queue instead.
  bool dynamic_shard = false;
  std::optional<DeviceName> device;

  uint32_t grid() const { return tile == 0 ? 0 : n / tile; }
};

struct WorkItem {
  uint32_t i = 0;
  uint32_t k = 0;
  uint32_t j = 0;
};

// All (i,k,j) triples in row-major enumeration order, length grid^3.
std::vector<WorkItem> make_work_list(uint32_t grid);

inline uint32_t target_index(const WorkItem& w, uint32_t grid) { return w.i * grid + w.j; }
inline uint32_t reducer_for_target(uint32_t target, uint32_t reducers) {
  return target % reducers;
}

// Flop estimate for an N x N product: 2N^3 - N^2.
uint64_t flops_matmul(uint64_t n);

// Cuts a square f32 matrix into (n/tile)^2 tile files named so a directory
// listing sorts in (row, col) order. Reassembly is bit-exact.
void split_matrix(const Tensor& matrix, const std::string& matrix_id, uint32_t tile,
                  const std::string& dir, TileAudit* audit = nullptr);
Tensor assemble_matrix(const std::string& dir, const std::string& matrix_id, uint32_t n,
                       uint32_t tile, TileAudit* audit = nullptr);

struct MatmulWorkerStats {
  uint64_t items = 0;
  uint64_t partials_enqueued = 0;
};

struct MatmulReducerStats {
  uint64_t partials = 0;
  uint64_t markers = 0;
  uint64_t tiles_written = 0;
};

// Runs one worker's share of the plan against the live cluster; returns
// after pushing a done-marker to every reducer.
MatmulWorkerStats matmul_worker(const MatmulPlan& plan, uint32_t worker_index,
                                const ClusterSpec& cluster, TileAudit* audit = nullptr);

// Drains this reducer's queue until every worker's done-marker arrived, then
// writes the C tiles of its parity class.
MatmulReducerStats matmul_reducer(const MatmulPlan& plan, uint32_t reducer_index,
                                  const ClusterSpec& cluster, TileAudit* audit = nullptr);

// Dynamic sharding only: pushes the whole work list into the shared work
// queue and closes it so workers drain and stop.
void feed_matmul_work(const MatmulPlan& plan, const ClusterSpec& cluster);

}  // namespace flowhpc

#endif  // FLOWHPC_APPS_MATMUL_HPP_

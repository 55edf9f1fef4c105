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
#include "flowhpc/apps/matmul.hpp"

#include <cstring>
#include <map>
#include <memory>

#include "flowhpc/error.hpp"
#include "flowhpc/graph.hpp"
#include "flowhpc/session.hpp"

namespace flowhpc {
namespace {

constexpr const char* kPartialQueue = "partials";
constexpr const char* kWorkQueue = "work";
constexpr uint32_t kQueueCapacity = 32;

void check_plan(const MatmulPlan& plan) {
  if (plan.n == 0 || plan.tile == 0 || plan.tile > plan.n || plan.n % plan.tile != 0) {
    throw_error(ErrorCode::kIndivisibleTile,
                "tile " + std::to_string(plan.tile) + " does not divide N " +
                    std::to_string(plan.n));
  }
  if (plan.workers == 0 || plan.reducers == 0) {
    throw_error(ErrorCode::kInvalidArgument, "need at least one worker and one reducer");
  }
}

// Partial tiles travel as rank-1 f32 [target, payload...]. The header rides
// inside the element because queues carry plain tensors.
Tensor make_partial(uint32_t target, const Tensor& tile) {
  const auto src = tile.f32();
  std::vector<float> elem(1 + src.size());
  elem[0] = static_cast<float>(target);
  std::copy(src.begin(), src.end(), elem.begin() + 1);
  return Tensor::from_f32(Shape::vector(static_cast<int64_t>(elem.size())), elem);
}

Tensor make_done_marker(uint32_t worker_index) {
  return Tensor::scalar_f32(static_cast<float>(worker_index));
}

Tensor make_work_element(const WorkItem& w) {
  return Tensor::from_f32(Shape::vector(3), {static_cast<float>(w.i), static_cast<float>(w.k),
                                             static_cast<float>(w.j)});
}

WorkItem parse_work_element(const Tensor& t) {
  if (t.dtype() != DType::kF32 || t.elem_count() != 3) {
    throw_error(ErrorCode::kSanityCheckFailed, "malformed work item " + t.shape().to_string());
  }
  auto v = t.f32();
  return WorkItem{static_cast<uint32_t>(v[0]), static_cast<uint32_t>(v[1]),
                  static_cast<uint32_t>(v[2])};
}

}  // namespace

std::vector<WorkItem> make_work_list(uint32_t grid) {
  std::vector<WorkItem> items;
  items.reserve(static_cast<size_t>(grid) * grid * grid);
  for (uint32_t i = 0; i < grid; ++i)
    for (uint32_t k = 0; k < grid; ++k)
      for (uint32_t j = 0; j < grid; ++j) items.push_back(WorkItem{i, k, j});
  return items;
}

uint64_t flops_matmul(uint64_t n) { return 2 * n * n * n - n * n; }

void split_matrix(const Tensor& matrix, const std::string& matrix_id, uint32_t tile,
                  const std::string& dir, TileAudit* audit) {
  const Shape& shape = matrix.shape();
  if (shape.rank() != 2 || shape.dim(0) != shape.dim(1)) {
    throw_error(ErrorCode::kInvalidArgument, "split_matrix wants a square matrix, got " +
                                                 shape.to_string());
  }
  const uint32_t n = static_cast<uint32_t>(shape.dim(0));
  if (tile == 0 || n % tile != 0) {
    throw_error(ErrorCode::kIndivisibleTile,
                "tile " + std::to_string(tile) + " does not divide N " + std::to_string(n));
  }
  const uint32_t grid = n / tile;
  const size_t elem = dtype_size(matrix.dtype());
  const uint8_t* src = matrix.raw();
  for (uint32_t ti = 0; ti < grid; ++ti) {
    for (uint32_t tj = 0; tj < grid; ++tj) {
      std::vector<uint8_t> bytes(static_cast<size_t>(tile) * tile * elem);
      for (uint32_t r = 0; r < tile; ++r) {
        const size_t src_off =
            ((static_cast<size_t>(ti) * tile + r) * n + static_cast<size_t>(tj) * tile) * elem;
        std::memcpy(bytes.data() + static_cast<size_t>(r) * tile * elem, src + src_off,
                    static_cast<size_t>(tile) * elem);
      }
      Tensor t = Tensor::take(matrix.dtype(), Shape::matrix(tile, tile), std::move(bytes));
      write_square_tile(tile_path(dir, matrix_id, ti, tj), ti, tj, t, audit);
    }
  }
}

Tensor assemble_matrix(const std::string& dir, const std::string& matrix_id, uint32_t n,
                       uint32_t tile, TileAudit* audit) {
  if (tile == 0 || n % tile != 0) {
    throw_error(ErrorCode::kIndivisibleTile,
                "tile " + std::to_string(tile) + " does not divide N " + std::to_string(n));
  }
  const uint32_t grid = n / tile;
  std::vector<uint8_t> bytes;
  size_t elem = 0;
  DType dtype = DType::kF32;
  for (uint32_t ti = 0; ti < grid; ++ti) {
    for (uint32_t tj = 0; tj < grid; ++tj) {
      Tensor t = read_square_tile(tile_path(dir, matrix_id, ti, tj), ti, tj, audit);
      if (static_cast<uint32_t>(t.shape().dim(0)) != tile) {
        throw_error(ErrorCode::kLengthMismatch,
                    "tile edge " + std::to_string(t.shape().dim(0)) + ", expected " +
                        std::to_string(tile));
      }
      if (bytes.empty()) {
        dtype = t.dtype();
        elem = dtype_size(dtype);
        bytes.resize(static_cast<size_t>(n) * n * elem);
      }
      const uint8_t* src = t.raw();
      for (uint32_t r = 0; r < tile; ++r) {
        const size_t dst_off =
            ((static_cast<size_t>(ti) * tile + r) * n + static_cast<size_t>(tj) * tile) * elem;
        std::memcpy(bytes.data() + dst_off, src + static_cast<size_t>(r) * tile * elem,
                    static_cast<size_t>(tile) * elem);
      }
    }
  }
  return Tensor::take(dtype, Shape::matrix(n, n), std::move(bytes));
}

MatmulWorkerStats matmul_worker(const MatmulPlan& plan, uint32_t worker_index,
                                const ClusterSpec& cluster, TileAudit* audit) {
  check_plan(plan);
  const uint32_t grid = plan.grid();

  // Tile products run as graphs on the worker's own task server, so the
  // compute path is the same one remote clients would use.
  Session self(cluster.address_of({"worker", worker_index}));
  GraphBuilder b;
  const Shape tile_shape = Shape::matrix(plan.tile, plan.tile);
  const uint32_t pa = b.placeholder(DType::kF32, tile_shape);
  const uint32_t pb = b.placeholder(DType::kF32, tile_shape);
  const uint32_t mm = b.add(OpKind::kMatMul, {pa, pb}, {}, plan.device);
  const Graph g = b.build();
  const uint32_t gid = self.register_graph(g);

  std::vector<std::unique_ptr<Session>> reducers;
  for (uint32_t r = 0; r < plan.reducers; ++r) {
    reducers.push_back(std::make_unique<Session>(cluster.address_of({"reduce", r})));
  }

  MatmulWorkerStats stats;
  auto process = [&](const WorkItem& item) {
    Tensor a = read_square_tile(tile_path(plan.tiles_dir, "A", item.i, item.k), item.i, item.k,
                                audit);
    Tensor bt = read_square_tile(tile_path(plan.tiles_dir, "B", item.k, item.j), item.k, item.j,
                                 audit);
    Tensor partial = self.run_registered(gid, {mm}, {{pa, a}, {pb, bt}})[0];
    const uint32_t target = target_index(item, grid);
    const uint32_t r = reducer_for_target(target, plan.reducers);
    reducers[r]->enqueue(kPartialQueue, make_partial(target, partial), kQueueCapacity,
                         plan.timeout_ms);
    stats.items++;
    stats.partials_enqueued++;
  };

  if (plan.dynamic_shard) {
    Session feed(cluster.address_of({"reduce", 0}));
    for (;;) {
      Tensor elem;
      try {
        elem = feed.dequeue(kWorkQueue, kQueueCapacity, plan.timeout_ms);
      } catch (const FlowError& e) {
        if (e.code() == ErrorCode::kQueueClosed) break;
        throw;
      }
      process(parse_work_element(elem));
    }
  } else {
    const std::vector<WorkItem> items = make_work_list(grid);
    for (size_t idx = worker_index; idx < items.size(); idx += plan.workers) {
      process(items[idx]);
    }
  }

  for (auto& r : reducers) {
    r->enqueue(kPartialQueue, make_done_marker(worker_index), kQueueCapacity, plan.timeout_ms);
  }
  return stats;
}

MatmulReducerStats matmul_reducer(const MatmulPlan& plan, uint32_t reducer_index,
                                  const ClusterSpec& cluster, TileAudit* audit) {
  check_plan(plan);
  const uint32_t grid = plan.grid();
  const size_t tile_elems = static_cast<size_t>(plan.tile) * plan.tile;

  // Every target of this reducer's parity class starts as a zero tile, so
  // the output set is fixed up front and independent of traffic.
  std::map<uint32_t, std::vector<float>> acc;
  for (uint32_t t = 0; t < grid * grid; ++t) {
    if (reducer_for_target(t, plan.reducers) == reducer_index) {
      acc.emplace(t, std::vector<float>(tile_elems, 0.0f));
    }
  }

  Session self(cluster.address_of({"reduce", reducer_index}));
  MatmulReducerStats stats;
  while (stats.markers < plan.workers) {
    Tensor elem = self.dequeue(kPartialQueue, kQueueCapacity, plan.timeout_ms);
    if (elem.shape().rank() == 0) {
      stats.markers++;
      continue;
    }
    if (elem.dtype() != DType::kF32 || elem.shape().rank() != 1 ||
        static_cast<size_t>(elem.elem_count()) != tile_elems + 1) {
      throw_error(ErrorCode::kSanityCheckFailed,
                  "malformed partial tile " + elem.shape().to_string());
    }
    auto v = elem.f32();
    const uint32_t target = static_cast<uint32_t>(v[0]);
    auto it = acc.find(target);
    if (it == acc.end()) {
      throw_error(ErrorCode::kUnexpectedTargetParity,
                  "target " + std::to_string(target) + " does not belong to reducer " +
                      std::to_string(reducer_index));
    }
    float* dst = it->second.data();
    for (size_t idx = 0; idx < tile_elems; ++idx) dst[idx] += v[idx + 1];
    stats.partials++;
  }

  for (const auto& [target, buf] : acc) {
    const uint32_t ti = target / grid;
    const uint32_t tj = target % grid;
    Tensor t = Tensor::from_f32(Shape::matrix(plan.tile, plan.tile), buf);
    write_square_tile(tile_path(plan.out_dir, "C", ti, tj), ti, tj, t, audit);
    stats.tiles_written++;
  }
  return stats;
}

void feed_matmul_work(const MatmulPlan& plan, const ClusterSpec& cluster) {
  check_plan(plan);
  Session feed(cluster.address_of({"reduce", 0}));
  for (const WorkItem& w : make_work_list(plan.grid())) {
    feed.enqueue(kWorkQueue, make_work_element(w), kQueueCapacity, plan.timeout_ms);
  }
  feed.close_queue(kWorkQueue);
}

}  // namespace flowhpc

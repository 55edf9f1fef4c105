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
#ifndef FLOWHPC_EXECUTOR_HPP_
#define FLOWHPC_EXECUTOR_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "flowhpc/graph.hpp"
#include "flowhpc/placement.hpp"
#include "flowhpc/state.hpp"

namespace flowhpc {

// One record per executed node. Timestamps are steady-clock nanoseconds,
// so records order within a run but not across machines.
struct TraceRecord {
  uint32_t node_id = 0;
  OpKind op = OpKind::kConst;
  DeviceName device;
  uint64_t start_ns = 0;
  uint64_t end_ns = 0;
  uint64_t bytes_in = 0;
  uint64_t bytes_out = 0;
};

using FeedMap = std::map<uint32_t, Tensor>;

struct RunOptions {
  std::vector<DeviceName> devices{DeviceName::cpu(0)};
  PlacementOptions placement;
  // Runs every node on the calling thread in ascending id order. Used by
  // determinism tests and anywhere reproducible accumulation order matters.
  bool single_thread = false;
  bool trace = false;
  // Threads in the cpu pool for parallel runs; 0 picks a small automatic
  // value. Each dev device always gets exactly one worker thread.
  unsigned cpu_threads = 0;
};

struct RunResult {
  std::vector<Tensor> fetched;
  // In node id order; empty unless RunOptions::trace.
  std::vector<TraceRecord> trace;
};

// Executes exactly the transitive producer closure of `fetches`, honoring
// feeds as graph cut points: a fed node is never executed and its producers
// are not visited through it. Placeholders reachable without a feed fail
// with MissingFeed before anything runs. Stateful ops require `state`.
//
// Reentrant: concurrent runs over one Graph are safe and contend only
// inside the StateStore.
RunResult run_graph(const Graph& g, const std::vector<uint32_t>& fetches, const FeedMap& feeds,
                    StateStore* state, const RunOptions& opts = {});

}  // namespace flowhpc

#endif  // FLOWHPC_EXECUTOR_HPP_

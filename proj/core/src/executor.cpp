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
#include "flowhpc/executor.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "flowhpc/kernels.hpp"

namespace flowhpc {

namespace {

uint64_t now_ns() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

void expect_arity(const NodeSpec& n, size_t want) {
  if (n.inputs.size() != want)
    throw_error(ErrorCode::kInvalidArgument,
                std::string(op_kind_name(n.op_kind)) + " takes " + std::to_string(want) +
                    " inputs, got " + std::to_string(n.inputs.size()),
                n.id);
}

uint32_t int_attr_or(const NodeSpec& n, const char* key, uint32_t fallback) {
  const AttrValue* v = n.find_attr(key);
  return v ? static_cast<uint32_t>(v->int_value) : fallback;
}

StateStore* need_state(const NodeSpec& n, StateStore* state) {
  if (!state)
    throw_error(ErrorCode::kInvalidArgument,
                std::string(op_kind_name(n.op_kind)) + " requires a state store", n.id);
  return state;
}

Tensor eval_node(const NodeSpec& n, const std::vector<Tensor>& in, StateStore* state) {
  switch (n.op_kind) {
    case OpKind::kMatMul:
      expect_arity(n, 2);
      return ops::matmul(in[0], in[1]);
    case OpKind::kAdd:
      expect_arity(n, 2);
      return ops::add(in[0], in[1]);
    case OpKind::kDot:
      expect_arity(n, 2);
      return ops::dot(in[0], in[1]);
    case OpKind::kMatVec:
      expect_arity(n, 2);
      return ops::matvec(in[0], in[1]);
    case OpKind::kAxpy:
      expect_arity(n, 3);
      return ops::axpy(in[0], in[1], in[2]);
    case OpKind::kScale:
      expect_arity(n, 2);
      return ops::scale(in[0], in[1]);
    case OpKind::kFFT:
      expect_arity(n, 1);
      return ops::fft_local(in[0]);
    case OpKind::kRandomUniform:
      expect_arity(n, 0);
      return ops::random_uniform(n.attr("shape").shape_value, n.attr("dtype").dtype_value,
                                 n.attr("seed").int_value);
    case OpKind::kConst:
      expect_arity(n, 0);
      return n.attr("value").tensor_value;
    case OpKind::kPlaceholder:
      // Reachable placeholders are checked for feeds up front; getting here
      // means the closure walk has a bug.
      throw_error(ErrorCode::kMissingFeed, "placeholder executed without a feed", n.id);
    case OpKind::kVariableRead:
      expect_arity(n, 0);
      return need_state(n, state)->read_variable(n.attr("var").string_value);
    case OpKind::kAssignAdd:
      expect_arity(n, 1);
      return need_state(n, state)->assign_add(n.attr("var").string_value, in[0]);
    case OpKind::kAssign:
      expect_arity(n, 1);
      need_state(n, state)->assign(n.attr("var").string_value, in[0]);
      return in[0];
    case OpKind::kEnqueue:
      expect_arity(n, 1);
      need_state(n, state)->enqueue(n.attr("queue").string_value, in[0],
                                    int_attr_or(n, "capacity", 0),
                                    int_attr_or(n, "timeout_ms", 0));
      return in[0];
    case OpKind::kDequeue:
      expect_arity(n, 0);
      return need_state(n, state)->dequeue(n.attr("queue").string_value,
                                           int_attr_or(n, "capacity", 0),
                                           int_attr_or(n, "timeout_ms", 0));
    case OpKind::kIdentity:
      expect_arity(n, 1);
      return in[0];
  }
  throw_error(ErrorCode::kUnknown, "unhandled op kind", n.id);
}

// Depth-first walk of producers, cut at fed nodes. Returns closure ids in
// ascending order (ids are topological by construction).
std::vector<uint32_t> producer_closure(const Graph& g, const std::vector<uint32_t>& fetches,
                                       const FeedMap& feeds) {
  std::vector<char> seen(g.size(), 0);
  std::vector<uint32_t> stack;
  for (uint32_t f : fetches) {
    if (f >= g.size())
      throw_error(ErrorCode::kInvalidArgument, "fetch id " + std::to_string(f) + " out of range");
    if (!feeds.count(f)) stack.push_back(f);
  }
  while (!stack.empty()) {
    uint32_t id = stack.back();
    stack.pop_back();
    if (seen[id]) continue;
    seen[id] = 1;
    const NodeSpec& n = g.node(id);
    if (n.op_kind == OpKind::kPlaceholder)
      throw_error(ErrorCode::kMissingFeed,
                  "placeholder node " + std::to_string(id) + " reachable but not fed", id);
    for (uint32_t in : n.inputs) {
      if (in >= id)
        throw_error(ErrorCode::kCycleDetected,
                    "input " + std::to_string(in) + " does not precede node " +
                        std::to_string(id),
                    id);
      if (!seen[in] && !feeds.count(in)) stack.push_back(in);
    }
  }
  std::vector<uint32_t> closure;
  for (uint32_t id = 0; id < g.size(); ++id)
    if (seen[id]) closure.push_back(id);
  return closure;
}

struct NodeRun {
  const Graph* g;
  const FeedMap* feeds;
  StateStore* state;
  std::vector<Tensor>* values;
  std::vector<TraceRecord>* trace;           // nullptr when tracing is off
  const std::vector<uint32_t>* trace_slot;   // id -> index into trace
  const std::vector<DeviceName>* placements; // id -> device

  const Tensor& value_of(uint32_t id) const {
    auto it = feeds->find(id);
    return it != feeds->end() ? it->second : (*values)[id];
  }

  void operator()(uint32_t id) const {
    const NodeSpec& n = g->node(id);
    std::vector<Tensor> in;
    in.reserve(n.inputs.size());
    uint64_t bytes_in = 0;
    for (uint32_t i : n.inputs) {
      in.push_back(value_of(i));
      bytes_in += in.back().byte_size();
    }
    uint64_t t0 = now_ns();
    Tensor out;
    try {
      out = eval_node(n, in, state);
    } catch (const FlowError& e) {
      if (e.node_id() != FlowError::kNoNode) throw;
      throw FlowError(e.code(), e.what(), id);
    } catch (const std::exception& e) {
      throw FlowError(ErrorCode::kUnknown, e.what(), id);
    }
    uint64_t t1 = now_ns();
    if (trace) {
      TraceRecord& rec = (*trace)[(*trace_slot)[id]];
      rec.node_id = id;
      rec.op = n.op_kind;
      rec.device = (*placements)[id];
      rec.start_ns = t0;
      rec.end_ns = t1;
      rec.bytes_in = bytes_in;
      rec.bytes_out = out.byte_size();
    }
    (*values)[id] = std::move(out);
  }
};

void run_parallel(const std::vector<uint32_t>& closure, const Graph& g, const NodeRun& runner,
                  const std::vector<DeviceName>& placements, const FeedMap& feeds,
                  unsigned cpu_threads) {
  // Lane 0 is the cpu pool; each distinct dev device gets its own lane with
  // a single worker thread.
  std::vector<DeviceName> lane_device{DeviceName::cpu(0)};
  std::vector<size_t> lane_of(g.size(), 0);
  for (uint32_t id : closure) {
    const DeviceName& d = placements[id];
    if (d.kind == DeviceKind::kCpu) continue;
    auto it = std::find(lane_device.begin(), lane_device.end(), d);
    if (it == lane_device.end()) {
      lane_device.push_back(d);
      lane_of[id] = lane_device.size() - 1;
    } else {
      lane_of[id] = static_cast<size_t>(it - lane_device.begin());
    }
  }

  std::vector<int> pending(g.size(), 0);
  std::vector<std::vector<uint32_t>> consumers(g.size());
  std::vector<char> in_closure(g.size(), 0);
  for (uint32_t id : closure) in_closure[id] = 1;
  for (uint32_t id : closure) {
    for (uint32_t in : g.node(id).inputs) {
      if (feeds.count(in) || !in_closure[in]) continue;
      ++pending[id];
      consumers[in].push_back(id);
    }
  }

  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::deque<uint32_t>> ready(lane_device.size());
  size_t remaining = closure.size();
  bool failed = false;
  std::exception_ptr first_error;

  for (uint32_t id : closure)
    if (pending[id] == 0) ready[lane_of[id]].push_back(id);

  auto lane_main = [&](size_t lane) {
    for (;;) {
      uint32_t id;
      {
        std::unique_lock lk(mu);
        cv.wait(lk, [&] { return failed || remaining == 0 || !ready[lane].empty(); });
        if (failed || remaining == 0) return;
        id = ready[lane].front();
        ready[lane].pop_front();
      }
      try {
        runner(id);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!failed) {
          failed = true;
          first_error = std::current_exception();
        }
        cv.notify_all();
        return;
      }
      {
        std::lock_guard lk(mu);
        --remaining;
        for (uint32_t c : consumers[id])
          if (--pending[c] == 0) ready[lane_of[c]].push_back(c);
      }
      cv.notify_all();
    }
  };

  if (cpu_threads == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    cpu_threads = std::clamp(hw, 1u, 4u);
  }
  std::vector<std::thread> threads;
  for (unsigned i = 0; i < cpu_threads; ++i) threads.emplace_back(lane_main, 0);
  for (size_t lane = 1; lane < lane_device.size(); ++lane) threads.emplace_back(lane_main, lane);
  for (auto& t : threads) t.join();
  if (failed) std::rethrow_exception(first_error);
}

}  // namespace

RunResult run_graph(const Graph& g, const std::vector<uint32_t>& fetches, const FeedMap& feeds,
                    StateStore* state, const RunOptions& opts) {
  if (fetches.empty()) throw_error(ErrorCode::kInvalidArgument, "empty fetch list");
  for (const auto& [id, t] : feeds) {
    if (id >= g.size())
      throw_error(ErrorCode::kInvalidArgument, "feed id " + std::to_string(id) + " out of range");
    const NodeSpec& n = g.node(id);
    if (n.op_kind == OpKind::kPlaceholder) {
      if (const AttrValue* want = n.find_attr("dtype"); want && want->dtype_value != t.dtype())
        throw_error(ErrorCode::kDTypeMismatch,
                    std::string("feed is ") + dtype_name(t.dtype()) + ", placeholder declares " +
                        dtype_name(want->dtype_value),
                    id);
      if (const AttrValue* want = n.find_attr("shape"); want && want->shape_value != t.shape())
        throw_error(ErrorCode::kShapeMismatch, "feed shape " + t.shape().to_string() +
                                                   ", placeholder declares " +
                                                   want->shape_value.to_string(),
                    id);
    }
  }

  std::vector<uint32_t> closure = producer_closure(g, fetches, feeds);
  std::vector<Tensor> values(g.size());
  std::vector<DeviceName> placements(g.size(), DeviceName::cpu(0));
  for (uint32_t id : closure) placements[id] = place(g, g.node(id), opts.devices, opts.placement);

  RunResult result;
  std::vector<uint32_t> trace_slot;
  if (opts.trace) {
    result.trace.resize(closure.size());
    trace_slot.assign(g.size(), 0);
    for (size_t i = 0; i < closure.size(); ++i) trace_slot[closure[i]] = static_cast<uint32_t>(i);
  }

  NodeRun runner{&g,
                 &feeds,
                 state,
                 &values,
                 opts.trace ? &result.trace : nullptr,
                 &trace_slot,
                 &placements};

  if (opts.single_thread) {
    for (uint32_t id : closure) runner(id);
  } else {
    run_parallel(closure, g, runner, placements, feeds, opts.cpu_threads);
  }

  result.fetched.reserve(fetches.size());
  for (uint32_t f : fetches) {
    auto it = feeds.find(f);
    result.fetched.push_back(it != feeds.end() ? it->second : values[f]);
  }
  return result;
}

}  // namespace flowhpc

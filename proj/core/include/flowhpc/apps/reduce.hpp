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
#ifndef FLOWHPC_APPS_REDUCE_HPP_
#define FLOWHPC_APPS_REDUCE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowhpc/session.hpp"

namespace flowhpc {

// A queue pair on the parameter server that turns W per-worker contributions
// into one value every worker receives. One round: each worker enqueues an
// element to "<name>.in", the reducer drains W of them, combines, and
// enqueues W copies of the result to "<name>.out"; each worker dequeues
// exactly one copy. Blocking queue semantics make every round a barrier:
// nobody leaves a round before everyone has entered it.
//
// Elements are rank-1 f64 tensors. Contributions carry [round, worker, ...],
// broadcast copies carry [round, ...]. Both sides check the round tag, so a
// worker slipping out of lockstep surfaces as an error instead of silently
// mixing rounds.
class ReduceChannel {
 public:
  // The session must stay valid for the channel's lifetime. The caller's
  // worker index only tags contributions; rounds are counted internally.
  ReduceChannel(Session* ps, std::string name, uint32_t workers, uint32_t worker_index,
                uint32_t timeout_ms);

  // Sums the W scalar contributions in reducer arrival order.
  double reduce_scalar(double value);

  // Concatenates W equal-length slices ordered by worker index.
  std::vector<double> all_gather(std::span<const double> slice);

  uint64_t rounds_completed() const { return round_; }

 private:
  Tensor next_output(uint64_t expect_len);

  Session* ps_;
  std::string in_name_;
  std::string out_name_;
  uint32_t workers_;
  uint32_t worker_index_;
  uint32_t timeout_ms_;
  uint64_t round_ = 0;
};

// Reducer side of one scalar channel. Loops rounds until the in-queue is
// closed, then returns the number of rounds served. Also returns on timeout
// so an abandoned reducer does not hang teardown forever.
uint64_t serve_scalar_reduce(Session& ps, const std::string& name, uint32_t workers,
                             uint32_t timeout_ms);

// Reducer side of one all-gather channel. Slices are placed by worker index,
// so the assembled vector does not depend on arrival order.
uint64_t serve_all_gather(Session& ps, const std::string& name, uint32_t workers,
                          uint32_t timeout_ms);

// Queue capacity for one channel direction. W contributions or W copies fit
// without blocking the reducer mid-broadcast.
uint32_t reduce_channel_capacity(uint32_t workers);

// Closes the contribution queue so the serving loop exits after draining.
// Call once the workers are known to be done with the channel.
void close_reduce_channel(Session& ps, const std::string& name);

}  // namespace flowhpc

#endif  // FLOWHPC_APPS_REDUCE_HPP_

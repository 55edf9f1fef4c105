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
#ifndef FLOWHPC_STATE_STORE_HPP_
#define FLOWHPC_STATE_STORE_HPP_

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>

#include "flowhpc/state.hpp"

namespace flowhpc {

// The store every task server hosts. Variables live under one lock (all
// operations on them are short); each queue owns its own lock and condition
// variables so a blocked dequeue never stalls unrelated sessions.
class InMemoryStateStore : public StateStore {
 public:
  explicit InMemoryStateStore(uint32_t default_queue_capacity = 32,
                              uint32_t default_timeout_ms = 30000);

  Tensor read_variable(const std::string& name) override;
  void assign(const std::string& name, const Tensor& value) override;
  Tensor assign_add(const std::string& name, const Tensor& delta) override;

  void enqueue(const std::string& queue, const Tensor& value, uint32_t capacity,
               uint32_t timeout_ms) override;
  Tensor dequeue(const std::string& queue, uint32_t capacity, uint32_t timeout_ms) override;

  // Closing rejects further enqueues immediately; dequeues drain what is
  // left, then fail with QueueClosed.
  void close_queue(const std::string& name);
  // Wakes every blocked queue operation; used at server shutdown.
  void close_all_queues();

  size_t queue_size(const std::string& name);

  // Checkpoint support. Queues are deliberately not part of snapshots.
  std::map<std::string, Tensor> snapshot_variables() const;
  void replace_variables(std::map<std::string, Tensor> vars);

 private:
  struct Queue {
    std::mutex mu;
    std::condition_variable not_full;
    std::condition_variable not_empty;
    std::deque<Tensor> items;
    uint32_t capacity = 0;
    bool closed = false;
  };

  // Creates on first touch; `capacity` only matters then.
  std::shared_ptr<Queue> ensure_queue(const std::string& name, uint32_t capacity);

  uint32_t default_capacity_;
  uint32_t default_timeout_ms_;

  mutable std::mutex vars_mu_;
  std::map<std::string, Tensor> vars_;

  std::mutex queues_mu_;
  std::map<std::string, std::shared_ptr<Queue>> queues_;
};

}  // namespace flowhpc

#endif  // FLOWHPC_STATE_STORE_HPP_

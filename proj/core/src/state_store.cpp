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
#include "flowhpc/state_store.hpp"

#include <chrono>

#include "flowhpc/kernels.hpp"

namespace flowhpc {

InMemoryStateStore::InMemoryStateStore(uint32_t default_queue_capacity,
                                       uint32_t default_timeout_ms)
    : default_capacity_(default_queue_capacity ? default_queue_capacity : 1),
      default_timeout_ms_(default_timeout_ms) {}

Tensor InMemoryStateStore::read_variable(const std::string& name) {
  std::lock_guard lk(vars_mu_);
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw_error(ErrorCode::kUnknownVariable, "no variable \"" + name + "\"");
  return it->second;
}

void InMemoryStateStore::assign(const std::string& name, const Tensor& value) {
  std::lock_guard lk(vars_mu_);
  vars_.insert_or_assign(name, value);
}

Tensor InMemoryStateStore::assign_add(const std::string& name, const Tensor& delta) {
  std::lock_guard lk(vars_mu_);
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw_error(ErrorCode::kUnknownVariable, "assign_add to missing variable \"" + name + "\"");
  // ops::add checks dtype and shape agreement.
  Tensor updated = ops::add(it->second, delta);
  it->second = updated;
  return updated;
}

std::shared_ptr<InMemoryStateStore::Queue> InMemoryStateStore::ensure_queue(
    const std::string& name, uint32_t capacity) {
  std::lock_guard lk(queues_mu_);
  auto it = queues_.find(name);
  if (it != queues_.end()) return it->second;
  auto q = std::make_shared<Queue>();
  q->capacity = capacity ? capacity : default_capacity_;
  queues_.emplace(name, q);
  return q;
}

void InMemoryStateStore::enqueue(const std::string& name, const Tensor& value, uint32_t capacity,
                                 uint32_t timeout_ms) {
  auto q = ensure_queue(name, capacity);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(timeout_ms ? timeout_ms : default_timeout_ms_);
  std::unique_lock lk(q->mu);
  bool ok = q->not_full.wait_until(lk, deadline,
                                   [&] { return q->closed || q->items.size() < q->capacity; });
  if (q->closed)
    throw_error(ErrorCode::kQueueClosed, "enqueue on closed queue \"" + name + "\"");
  if (!ok)
    throw_error(ErrorCode::kTimeout, "enqueue timed out on full queue \"" + name + "\"");
  q->items.push_back(value);
  lk.unlock();
  q->not_empty.notify_one();
}

Tensor InMemoryStateStore::dequeue(const std::string& name, uint32_t capacity,
                                   uint32_t timeout_ms) {
  auto q = ensure_queue(name, capacity);
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(timeout_ms ? timeout_ms : default_timeout_ms_);
  std::unique_lock lk(q->mu);
  bool ok = q->not_empty.wait_until(lk, deadline,
                                    [&] { return q->closed || !q->items.empty(); });
  if (q->items.empty()) {
    if (q->closed)
      throw_error(ErrorCode::kQueueClosed, "queue \"" + name + "\" closed and drained");
    (void)ok;
    throw_error(ErrorCode::kTimeout, "dequeue timed out on empty queue \"" + name + "\"");
  }
  Tensor front = std::move(q->items.front());
  q->items.pop_front();
  lk.unlock();
  q->not_full.notify_one();
  return front;
}

void InMemoryStateStore::close_queue(const std::string& name) {
  auto q = ensure_queue(name, 0);
  {
    std::lock_guard lk(q->mu);
    q->closed = true;
  }
  q->not_full.notify_all();
  q->not_empty.notify_all();
}

void InMemoryStateStore::close_all_queues() {
  std::vector<std::shared_ptr<Queue>> all;
  {
    std::lock_guard lk(queues_mu_);
    for (auto& [name, q] : queues_) all.push_back(q);
  }
  for (auto& q : all) {
    {
      std::lock_guard lk(q->mu);
      q->closed = true;
    }
    q->not_full.notify_all();
    q->not_empty.notify_all();
  }
}

size_t InMemoryStateStore::queue_size(const std::string& name) {
  auto q = ensure_queue(name, 0);
  std::lock_guard lk(q->mu);
  return q->items.size();
}

std::map<std::string, Tensor> InMemoryStateStore::snapshot_variables() const {
  std::lock_guard lk(vars_mu_);
  return vars_;
}

void InMemoryStateStore::replace_variables(std::map<std::string, Tensor> vars) {
  std::lock_guard lk(vars_mu_);
  vars_ = std::move(vars);
}

}  // namespace flowhpc

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
#ifndef FLOWHPC_STATE_HPP_
#define FLOWHPC_STATE_HPP_

#include <cstdint>
#include <string>

#include "flowhpc/tensor.hpp"

namespace flowhpc {

// Mutable state that outlives individual graph runs: named variables and
// named bounded FIFO queues. The executor talks to state only through this
// interface; the server provides the real store, tests may stub it.
//
// Implementations synchronize internally. assign and assign_add are atomic
// per variable; enqueue and dequeue block until space or data is available,
// or until timeout_ms elapses (0 selects the store's default timeout).
class StateStore {
 public:
  virtual ~StateStore() = default;

  virtual Tensor read_variable(const std::string& name) = 0;
  virtual void assign(const std::string& name, const Tensor& value) = 0;
  // Returns the post-add value so a fetch of the node observes the update.
  virtual Tensor assign_add(const std::string& name, const Tensor& delta) = 0;

  // capacity takes effect only if the queue does not exist yet; 0 requests
  // the default. A closed queue rejects enqueues; dequeue drains remaining
  // elements, then fails.
  virtual void enqueue(const std::string& queue, const Tensor& value, uint32_t capacity,
                       uint32_t timeout_ms) = 0;
  virtual Tensor dequeue(const std::string& queue, uint32_t capacity, uint32_t timeout_ms) = 0;
};

}  // namespace flowhpc

#endif  // FLOWHPC_STATE_HPP_

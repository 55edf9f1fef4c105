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
#ifndef FLOWHPC_PLACEMENT_HPP_
#define FLOWHPC_PLACEMENT_HPP_

#include <vector>

#include "flowhpc/graph.hpp"

namespace flowhpc {

struct PlacementOptions {
  // When a node is pinned to a device that cannot run its op, fall back to
  // the first device that can instead of failing.
  bool soft_placement = true;
};

// Whether the op has a kernel for the device kind. Host-bound ops (consts,
// placeholders, queue endpoints) are cpu only.
bool op_supported_on(OpKind op, DeviceKind kind);

// Resolves one node to a concrete device. `available` must contain /cpu:0.
// Unpinned compute-capable nodes prefer the first dev slot.
DeviceName place(const Graph& g, const NodeSpec& node, const std::vector<DeviceName>& available,
                 const PlacementOptions& opts = {});

// place() for every node, indexed by node id.
std::vector<DeviceName> place_all(const Graph& g, const std::vector<DeviceName>& available,
                                  const PlacementOptions& opts = {});

}  // namespace flowhpc

#endif  // FLOWHPC_PLACEMENT_HPP_

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
#ifndef FLOWHPC_GRAPH_IO_HPP_
#define FLOWHPC_GRAPH_IO_HPP_

#include <cstdint>
#include <vector>

#include "flowhpc/graph.hpp"

namespace flowhpc {

// Serialized graphs may not exceed this many bytes. Keeping loop bodies out
// of the graph and state in variables is the intended workaround, the same
// discipline a hard message-size ceiling forces on any RPC layer.
inline constexpr size_t kMaxSerializedGraphBytes = 64ull << 20;

// Canonical binary form, magic "DFG1". A pure function of the node list:
// the same nodes always produce the same bytes, on every platform.
std::vector<uint8_t> serialize_graph(const Graph& g);

// Rebuilds a graph from canonical bytes. Validates the magic, dense id
// numbering, and topological input order.
Graph deserialize_graph(const std::vector<uint8_t>& bytes);

}  // namespace flowhpc

#endif  // FLOWHPC_GRAPH_IO_HPP_

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
#include "flowhpc/placement.hpp"

#include <algorithm>

namespace flowhpc {

bool op_supported_on(OpKind op, DeviceKind kind) {
  if (kind == DeviceKind::kCpu) return true;
  switch (op) {
    case OpKind::kConst:
    case OpKind::kPlaceholder:
    case OpKind::kEnqueue:
    case OpKind::kDequeue:
      return false;
    default:
      return true;
  }
}

DeviceName place(const Graph& g, const NodeSpec& node, const std::vector<DeviceName>& available,
                 const PlacementOptions& opts) {
  (void)g;
  if (available.empty() ||
      std::find(available.begin(), available.end(), DeviceName::cpu(0)) == available.end())
    throw_error(ErrorCode::kInvalidArgument, "available devices must include /cpu:0");

  auto first_supporting = [&]() -> DeviceName {
    for (const DeviceName& d : available)
      if (op_supported_on(node.op_kind, d.kind)) return d;
    return DeviceName::cpu(0);
  };

  if (node.device.has_value()) {
    const DeviceName& pinned = *node.device;
    bool present = std::find(available.begin(), available.end(), pinned) != available.end();
    if (present && op_supported_on(node.op_kind, pinned.kind)) return pinned;
    if (!opts.soft_placement)
      throw_error(ErrorCode::kUnsupportedPlacement,
                  std::string(op_kind_name(node.op_kind)) + " pinned to " + pinned.to_string() +
                      (present ? " which has no kernel for it" : " which is not available"),
                  node.id);
    return first_supporting();
  }

  if (op_supported_on(node.op_kind, DeviceKind::kDev)) {
    for (const DeviceName& d : available)
      if (d.kind == DeviceKind::kDev) return d;
  }
  return DeviceName::cpu(0);
}

std::vector<DeviceName> place_all(const Graph& g, const std::vector<DeviceName>& available,
                                  const PlacementOptions& opts) {
  std::vector<DeviceName> out;
  out.reserve(g.size());
  for (const NodeSpec& n : g.nodes()) out.push_back(place(g, n, available, opts));
  return out;
}

}  // namespace flowhpc

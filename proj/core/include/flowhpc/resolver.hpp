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
#ifndef FLOWHPC_RESOLVER_HPP_
#define FLOWHPC_RESOLVER_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowhpc/cluster_spec.hpp"
#include "flowhpc/device.hpp"

namespace flowhpc {

struct ResolverConfig {
  // (job name, task count), laid out across slots in this order.
  std::vector<std::pair<std::string, uint32_t>> jobs;
  uint32_t tasks_per_node = 1;
  uint16_t base_port = 8888;
  uint32_t devices_per_node = 0;
  // With a remainder in devices_per_node / tasks_per_node: fail when strict,
  // otherwise leave the excess devices unassigned.
  bool strict_devices = false;
};

struct ResolvedTask {
  TaskIdentity identity;
  TaskAddress address;
  // The dev slots this task exposes, disjoint from its node neighbors.
  // Indices are node-local, so the second task on a 2-device node gets
  // /dev:1. Servers add /cpu:0 on their own.
  std::vector<DeviceName> devices;
};

struct ResolvedCluster {
  ClusterSpec spec;
  std::vector<ResolvedTask> tasks;
};

// Slot s lives on node s / tasks_per_node with on-node rank s %
// tasks_per_node and port base_port + rank. Jobs fill slots in config
// order, so the first job lands on the first node.
ResolvedCluster resolve(const ResolverConfig& config, const std::string& nodelist);

// Environment plumbing used by the command line.
std::optional<std::string> slurm_nodelist_from_env();
std::optional<uint32_t> slurm_tasks_per_node_from_env();

// Shells out to `scontrol show hostnames`. Only for real clusters; the
// built-in parser is the default everywhere.
std::vector<std::string> expand_hostlist_via_scontrol(const std::string& compressed);

}  // namespace flowhpc

#endif  // FLOWHPC_RESOLVER_HPP_

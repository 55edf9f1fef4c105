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
#include "flowhpc/resolver.hpp"

#include <cstdio>
#include <cstdlib>

#include "flowhpc/error.hpp"
#include "flowhpc/hostlist.hpp"

namespace flowhpc {

ResolvedCluster resolve(const ResolverConfig& config, const std::string& nodelist) {
  if (config.tasks_per_node == 0)
    throw_error(ErrorCode::kInvalidArgument, "tasks_per_node must be positive");
  for (const auto& [name, count] : config.jobs)
    if (count == 0)
      throw_error(ErrorCode::kInvalidArgument, "job \"" + name + "\" requests zero tasks");

  std::vector<std::string> hosts = expand_hostlist(nodelist);
  uint64_t total = 0;
  for (const auto& [name, count] : config.jobs) total += count;
  uint64_t slots = static_cast<uint64_t>(hosts.size()) * config.tasks_per_node;
  if (total > slots)
    throw_error(ErrorCode::kInsufficientNodes,
                std::to_string(total) + " tasks need more than " + std::to_string(hosts.size()) +
                    " nodes x " + std::to_string(config.tasks_per_node) + " tasks/node");
  if (total == 0) throw_error(ErrorCode::kInvalidArgument, "no jobs requested");

  uint32_t devices_per_task = 0;
  if (config.devices_per_node > 0) {
    if (config.devices_per_node % config.tasks_per_node != 0 && config.strict_devices)
      throw_error(ErrorCode::kIndivisibleDevices,
                  std::to_string(config.devices_per_node) + " devices per node do not divide by " +
                      std::to_string(config.tasks_per_node) + " tasks per node");
    devices_per_task = config.devices_per_node / config.tasks_per_node;
  }
  if (config.base_port + config.tasks_per_node - 1 > 0xffff)
    throw_error(ErrorCode::kInvalidArgument, "port range exceeds 65535");

  ResolvedCluster out;
  uint64_t slot = 0;
  for (const auto& [job, count] : config.jobs) {
    std::vector<TaskAddress> addresses;
    for (uint32_t t = 0; t < count; ++t, ++slot) {
      uint64_t node = slot / config.tasks_per_node;
      uint32_t rank = static_cast<uint32_t>(slot % config.tasks_per_node);
      TaskAddress addr{hosts[node], static_cast<uint16_t>(config.base_port + rank)};
      ResolvedTask task;
      task.identity = TaskIdentity{job, t};
      task.address = addr;
      for (uint32_t d = rank * devices_per_task; d < (rank + 1) * devices_per_task; ++d)
        task.devices.push_back(DeviceName::dev(static_cast<uint16_t>(d)));
      addresses.push_back(addr);
      out.tasks.push_back(std::move(task));
    }
    out.spec.add_job(job, std::move(addresses));
  }
  return out;
}

std::optional<std::string> slurm_nodelist_from_env() {
  const char* v = std::getenv("SLURM_JOB_NODELIST");
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::optional<uint32_t> slurm_tasks_per_node_from_env() {
  const char* v = std::getenv("SLURM_NTASKS_PER_NODE");
  if (!v || !*v) return std::nullopt;
  // Heterogeneous values look like "2(x3),1"; the leading integer is the
  // homogeneous count we support.
  char* end = nullptr;
  unsigned long n = std::strtoul(v, &end, 10);
  if (end == v || n == 0 || n > 0xffff)
    throw_error(ErrorCode::kParseError,
                std::string("bad SLURM_NTASKS_PER_NODE value \"") + v + "\"");
  return static_cast<uint32_t>(n);
}

std::vector<std::string> expand_hostlist_via_scontrol(const std::string& compressed) {
  std::string cmd = "scontrol show hostnames '" + compressed + "' 2>/dev/null";
  if (compressed.find('\'') != std::string::npos)
    throw_error(ErrorCode::kInvalidArgument, "nodelist must not contain quotes");
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw_error(ErrorCode::kSpawnFailed, "cannot run scontrol");
  std::vector<std::string> hosts;
  char buf[512];
  std::string line;
  while (std::fgets(buf, sizeof buf, pipe)) {
    line = buf;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (!line.empty()) hosts.push_back(line);
  }
  int rc = ::pclose(pipe);
  if (rc != 0)
    throw_error(ErrorCode::kSpawnFailed,
                "scontrol exited with status " + std::to_string(rc));
  return hosts;
}

}  // namespace flowhpc
